#include "hopper/dynamics.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <cmath>
#include <limits>
#include <sstream>

namespace hopper {

namespace {

// Unit vector along a segment hanging at angle a from the downward vertical.
Vec2 along(double a) { return {std::sin(a), -std::cos(a)}; }
// d(along)/da
Vec2 along_prime(double a) { return {std::cos(a), std::sin(a)}; }

void set_base_columns(BodyFrame& b)
{
    b.jv(0, idx::kX) = 1.0;
    b.jv(1, idx::kZ) = 1.0;
}

}  // namespace

BodyFrames body_frames(const Vec8& q, const Vec8& qdot, const RobotParams& p)
{
    BodyFrames bodies;
    const Vec2 base(q[idx::kX], q[idx::kZ]);
    const double theta = q[idx::kPitch];
    const double theta_dot = qdot[idx::kPitch];

    BodyFrame& torso = bodies[0];
    torso.mass = p.torso_mass;
    torso.inertia = p.torso_inertia;
    torso.position = base;
    set_base_columns(torso);
    torso.jw(idx::kPitch) = 1.0;

    BodyFrame& wheel = bodies[1];
    wheel.mass = p.wheel_mass;
    wheel.inertia = p.wheel_inertia;
    wheel.position = base;
    set_base_columns(wheel);
    wheel.jw(idx::kPitch) = 1.0;
    wheel.jw(idx::kWheel) = 1.0;

    const double l1 = p.upper_leg_length;
    const double l2 = p.lower_leg_length;
    for (int leg = 0; leg < 2; ++leg) {
        const int h = idx::hip(leg);
        const int k = idx::knee(leg);
        const double au = theta + q[h];
        const double al = au + q[k];
        const double wu = theta_dot + qdot[h];
        const double wl = wu + qdot[k];

        BodyFrame& upper = bodies[2 + 2 * leg];
        upper.mass = p.upper_leg_mass;
        upper.inertia = p.upper_leg_mass * l1 * l1 / 12.0;
        upper.position = base + 0.5 * l1 * along(au);
        set_base_columns(upper);
        const Vec2 upper_turn = 0.5 * l1 * along_prime(au);
        upper.jv.col(idx::kPitch) = upper_turn;
        upper.jv.col(h) = upper_turn;
        upper.jw(idx::kPitch) = 1.0;
        upper.jw(h) = 1.0;
        upper.jdot_qdot = -0.5 * l1 * wu * wu * along(au);

        BodyFrame& lower = bodies[3 + 2 * leg];
        lower.mass = p.lower_leg_mass;
        lower.inertia = p.lower_leg_mass * l2 * l2 / 12.0;
        lower.position = base + l1 * along(au) + 0.5 * l2 * along(al);
        set_base_columns(lower);
        const Vec2 lower_knee_turn = 0.5 * l2 * along_prime(al);
        const Vec2 lower_hip_turn = l1 * along_prime(au) + lower_knee_turn;
        lower.jv.col(idx::kPitch) = lower_hip_turn;
        lower.jv.col(h) = lower_hip_turn;
        lower.jv.col(k) = lower_knee_turn;
        lower.jw(idx::kPitch) = 1.0;
        lower.jw(h) = 1.0;
        lower.jw(k) = 1.0;
        lower.jdot_qdot = -l1 * wu * wu * along(au) - 0.5 * l2 * wl * wl * along(al);
    }
    return bodies;
}

FootPair foot_states(const Vec8& q, const Vec8& qdot, const RobotParams& p)
{
    FootPair feet;
    const Vec2 base(q[idx::kX], q[idx::kZ]);
    const double theta = q[idx::kPitch];
    const double l1 = p.upper_leg_length;
    const double l2 = p.lower_leg_length;
    for (int leg = 0; leg < 2; ++leg) {
        const int h = idx::hip(leg);
        const int k = idx::knee(leg);
        const double au = theta + q[h];
        const double al = au + q[k];
        FootState& f = feet[leg];
        f.position = base + l1 * along(au) + l2 * along(al);
        f.jacobian.setZero();
        f.jacobian(0, idx::kX) = 1.0;
        f.jacobian(1, idx::kZ) = 1.0;
        const Vec2 knee_turn = l2 * along_prime(al);
        const Vec2 hip_turn = l1 * along_prime(au) + knee_turn;
        f.jacobian.col(idx::kPitch) = hip_turn;
        f.jacobian.col(h) = hip_turn;
        f.jacobian.col(k) = knee_turn;
        f.velocity = f.jacobian * qdot;
    }
    return feet;
}

Mat85 actuation_map()
{
    Mat85 b = Mat85::Zero();
    b(idx::kWheel, act::kWheel) = 1.0;
    for (int j = 0; j < 4; ++j) b(idx::kHipL + j, 1 + j) = 1.0;
    return b;
}

DynamicsTerms dynamics_terms(const Vec8& q, const Vec8& qdot, const RobotParams& p)
{
    DynamicsTerms t;
    const BodyFrames bodies = body_frames(q, qdot, p);
    const Vec2 gravity_acc(0.0, -p.gravity);
    for (const BodyFrame& b : bodies) {
        t.mass.noalias() += b.mass * b.jv.transpose() * b.jv;
        t.mass.noalias() += b.inertia * b.jw.transpose() * b.jw;
        t.bias.noalias() += b.mass * b.jv.transpose() * (b.jdot_qdot - gravity_acc);
    }
    // Enforce exact symmetry against round-off in the accumulation.
    t.mass = 0.5 * (t.mass + t.mass.transpose()).eval();
    t.actuation = actuation_map();
    const FootPair feet = foot_states(q, qdot, p);
    t.contact_jacobian = {feet[0].jacobian, feet[1].jacobian};
    return t;
}

Mat8 mass_matrix(const Vec8& q, const RobotParams& p) { return dynamics_terms(q, Vec8::Zero(), p).mass; }

Vec8 bias_terms(const Vec8& q, const Vec8& qdot, const RobotParams& p) { return dynamics_terms(q, qdot, p).bias; }

Vec8 gravity_terms(const Vec8& q, const RobotParams& p) { return bias_terms(q, Vec8::Zero(), p); }

Conditioning mass_matrix_conditioning(const Mat8& mass)
{
    Eigen::SelfAdjointEigenSolver<Mat8> es(mass, Eigen::EigenvaluesOnly);
    Conditioning c;
    c.min_eigenvalue = es.eigenvalues().minCoeff();
    const double max_ev = es.eigenvalues().maxCoeff();
    c.condition_number = c.min_eigenvalue > 0.0 ? max_ev / c.min_eigenvalue : std::numeric_limits<double>::infinity();
    c.singular = !(c.condition_number <= 1e12);
    return c;
}

ForwardDynamicsResult forward_dynamics(const Vec8& q, const Vec8& qdot, const Vec5& tau, const ForcePair& f_contact,
                                       const RobotParams& p, const ForwardDynamicsOptions& opts)
{
    const DynamicsTerms t = dynamics_terms(q, qdot, p);

    Vec8 leg_tau = Vec8::Zero();
    leg_tau.tail<4>() = tau.tail<4>();
    Vec8 rhs = leg_tau + opts.external - t.bias;
    for (int leg = 0; leg < 2; ++leg) rhs.noalias() += t.contact_jacobian[leg].transpose() * f_contact[leg];

    // Coordinates with prescribed acceleration: the wheel always, legs when locked.
    Vec8 known = Vec8::Zero();
    std::array<bool, 8> prescribed{};
    prescribed[idx::kWheel] = true;
    known[idx::kWheel] = tau[act::kWheel] / p.wheel_inertia;
    if (opts.lock_legs) {
        for (int j = idx::kHipL; j <= idx::kKneeR; ++j) prescribed[j] = true;
    }

    std::array<int, 8> free_idx{};
    int n = 0;
    for (int i = 0; i < idx::kDof; ++i)
        if (!prescribed[i]) free_idx[n++] = i;

    using MatN = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, 8, 8>;
    using VecN = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, 8, 1>;
    MatN a(n, n);
    VecN b(n);
    Mat8 mass = t.mass;
    if (opts.implicit_dt > 0.0) mass += opts.implicit_dt * opts.implicit_damping;
    const Vec8 known_load = mass * known;
    for (int r = 0; r < n; ++r) {
        b[r] = rhs[free_idx[r]] - known_load[free_idx[r]];
        for (int c = 0; c < n; ++c) a(r, c) = mass(free_idx[r], free_idx[c]);
    }
    Eigen::LLT<MatN> llt(a);
    if (llt.info() != Eigen::Success) {
        std::ostringstream os;
        os << "forward dynamics: inertia matrix not positive definite at q = [" << q.transpose() << "]";
        throw Error(os.str());
    }
    const VecN x = llt.solve(b);

    ForwardDynamicsResult r;
    r.qddot = known;
    for (int i = 0; i < n; ++i) r.qddot[free_idx[i]] = x[i];
    if (!r.qddot.allFinite()) {
        std::ostringstream os;
        os << "forward dynamics: non-finite acceleration at q = [" << q.transpose() << "], qdot = ["
           << qdot.transpose() << "]";
        throw Error(os.str());
    }
    const Vec8 residual = mass * r.qddot - rhs;
    r.wheel_motor_torque = residual[idx::kWheel];
    return r;
}

Vec2 com_position(const Vec8& q, const RobotParams& p)
{
    const BodyFrames bodies = body_frames(q, Vec8::Zero(), p);
    Vec2 c = Vec2::Zero();
    for (const BodyFrame& b : bodies) c += b.mass * b.position;
    return c / p.total_mass();
}

Vec2 com_velocity(const Vec8& q, const Vec8& qdot, const RobotParams& p)
{
    const Mat38 a = centroidal_matrix(q, p);
    return a.topRows<2>() * qdot / p.total_mass();
}

Mat38 centroidal_matrix(const Vec8& q, const RobotParams& p)
{
    const BodyFrames bodies = body_frames(q, Vec8::Zero(), p);
    Vec2 c = Vec2::Zero();
    for (const BodyFrame& b : bodies) c += b.mass * b.position;
    c /= p.total_mass();

    Mat38 a = Mat38::Zero();
    for (const BodyFrame& b : bodies) {
        a.topRows<2>() += b.mass * b.jv;
        const Vec2 r = b.position - c;
        a.row(2) += b.mass * (r.x() * b.jv.row(1) - r.y() * b.jv.row(0)) + b.inertia * b.jw;
    }
    return a;
}

double total_pitch_momentum(const Vec8& q, const Vec8& qdot, const RobotParams& p, bool reduced)
{
    if (reduced) {
        return p.torso_inertia * qdot[idx::kPitch] + p.wheel_inertia * (qdot[idx::kPitch] + qdot[idx::kWheel]);
    }
    return centroidal_matrix(q, p).row(2).dot(qdot);
}

double gyrostat_accel(double tau_w, double tau_ext, const RobotParams& p)
{
    return (tau_ext - tau_w) / (p.torso_inertia + p.wheel_inertia);
}

Energy mechanical_energy(const Vec8& q, const Vec8& qdot, const RobotParams& p, double datum)
{
    const BodyFrames bodies = body_frames(q, qdot, p);
    Energy e;
    for (const BodyFrame& b : bodies) {
        const Vec2 v = b.jv * qdot;
        const double w = b.jw.dot(qdot);
        e.kinetic += 0.5 * b.mass * v.squaredNorm() + 0.5 * b.inertia * w * w;
        e.potential += b.mass * p.gravity * (b.position.y() - datum);
    }
    return e;
}

}  // namespace hopper
