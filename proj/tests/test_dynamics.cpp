#include <doctest.h>

#include "hopper/dynamics.hpp"
#include "oracles.hpp"

#include <Eigen/LU>

#include <cmath>
#include <random>

using namespace hopper;

namespace {

const RobotParams kParams = default_robot_params();
const ForcePair kNoForce{Vec2::Zero(), Vec2::Zero()};

RobotParams massless_legs()
{
    RobotParams p = default_robot_params();
    p.upper_leg_mass = 0.0;
    p.lower_leg_mass = 0.0;
    return p;
}

Vec8 standing_q()
{
    Vec8 q = Vec8::Zero();
    q[idx::kZ] = 1.0;
    q[idx::kHipL] = 0.4;
    q[idx::kKneeL] = -0.8;
    q[idx::kHipR] = -0.1;
    q[idx::kKneeR] = -0.5;
    return q;
}

struct Rk4 {
    Vec5 tau = Vec5::Zero();
    RobotParams p = kParams;

    Vec8 accel(const Vec8& q, const Vec8& v) const { return forward_dynamics(q, v, tau, kNoForce, p).qddot; }

    void step(Vec8& q, Vec8& v, double h) const
    {
        const Vec8 k1q = v, k1v = accel(q, v);
        const Vec8 k2q = v + 0.5 * h * k1v, k2v = accel(q + 0.5 * h * k1q, k2q);
        const Vec8 k3q = v + 0.5 * h * k2v, k3v = accel(q + 0.5 * h * k2q, k3q);
        const Vec8 k4q = v + h * k3v, k4v = accel(q + h * k3q, k4q);
        q += h / 6.0 * (k1q + 2.0 * k2q + 2.0 * k3q + k4q);
        v += h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
    }
};

}  // namespace

TEST_CASE("wheel entries of the mass matrix")
{
    const Mat8 m = mass_matrix(standing_q(), kParams);
    CHECK(m(idx::kWheel, idx::kWheel) == doctest::Approx(kParams.wheel_inertia));
    CHECK(m(idx::kPitch, idx::kWheel) == doctest::Approx(kParams.wheel_inertia));
    CHECK(m(idx::kX, idx::kWheel) == 0.0);
    CHECK(m(idx::kPitch, idx::kPitch) >= kParams.torso_inertia + kParams.wheel_inertia);
}

TEST_CASE("mass matrix is symmetric positive definite and matches the energy Hessian")
{
    std::mt19937_64 rng(11);
    for (int n = 0; n < 50; ++n) {
        const Vec8 q = oracle::random_q(rng, kParams);
        const Mat8 m = mass_matrix(q, kParams);
        CHECK((m - m.transpose()).norm() == 0.0);
        const Conditioning c = mass_matrix_conditioning(m);
        CHECK(c.min_eigenvalue > 0.0);
        CHECK_FALSE(c.singular);
        const Mat8 ref = oracle::kinetic_hessian(q, kParams);
        CHECK((m - ref).norm() <= 1e-6 * ref.norm());
    }
}

TEST_CASE("kinetic energy agrees with the segment oracle")
{
    std::mt19937_64 rng(12);
    for (int n = 0; n < 20; ++n) {
        const Vec8 q = oracle::random_q(rng, kParams);
        const Vec8 v = oracle::random_qdot(rng);
        const double t = mechanical_energy(q, v, kParams).kinetic;
        CHECK(t == doctest::Approx(oracle::kinetic(q, v, kParams)).epsilon(1e-8));
        CHECK(t == doctest::Approx(0.5 * v.dot(mass_matrix(q, kParams) * v)).epsilon(1e-12));
    }
}

TEST_CASE("bias at rest is gravity")
{
    std::mt19937_64 rng(13);
    const Vec8 q = oracle::random_q(rng, kParams);
    const Vec8 b = bias_terms(q, Vec8::Zero(), kParams);
    CHECK((b - gravity_terms(q, kParams)).norm() == 0.0);
    CHECK(b[idx::kX] == doctest::Approx(0.0));
    CHECK(b[idx::kZ] == doctest::Approx(13.325).epsilon(1e-12));

    RobotParams zero_g = kParams;
    zero_g.gravity = 0.0;
    CHECK(bias_terms(q, Vec8::Zero(), zero_g).norm() == 0.0);
}

TEST_CASE("energy balance matches actuator power under free flight")
{
    std::mt19937_64 rng(14);
    for (int n = 0; n < 3; ++n) {
        Vec8 q = oracle::random_q(rng, kParams);
        Vec8 v = oracle::random_qdot(rng, 1.0);
        v[idx::kWheel] = 0.0;  // zero wheel command holds the relative spin, so it must start at rest
        Rk4 sim;
        if (n > 0) sim.tau.tail<4>() << 0.3, -0.2, 0.1, 0.25;
        const double h = 1e-5;
        const double e0 = mechanical_energy(q, v, kParams).total();
        double work = 0.0;
        for (int k = 0; k < 100000; ++k) {
            const double p0 = v.tail<4>().dot(sim.tau.tail<4>());
            sim.step(q, v, h);
            work += 0.5 * h * (p0 + v.tail<4>().dot(sim.tau.tail<4>()));
        }
        const double e1 = mechanical_energy(q, v, kParams).total();
        const double scale = std::max(1.0, std::abs(e0));
        CHECK(std::abs(e1 - e0 - work) <= 1e-4 * scale);
    }
}

TEST_CASE("ballistic acceleration at rest")
{
    const Vec8 qdd = forward_dynamics(standing_q(), Vec8::Zero(), Vec5::Zero(), kNoForce, kParams).qddot;
    Vec8 expected = Vec8::Zero();
    expected[idx::kZ] = -kParams.gravity;
    CHECK((qdd - expected).norm() <= 1e-12);
}

TEST_CASE("massless frozen legs reduce to the gyrostat")
{
    const RobotParams p = massless_legs();
    std::mt19937_64 rng(15);
    std::uniform_real_distribution<double> u(-30.0, 30.0);
    for (int n = 0; n < 100; ++n) {
        const Vec8 q = oracle::random_q(rng, p);
        const Vec8 v = oracle::random_qdot(rng);
        Vec5 tau = Vec5::Zero();
        tau[act::kWheel] = u(rng);
        ForwardDynamicsOptions opts;
        opts.lock_legs = true;
        opts.external[idx::kPitch] = u(rng);
        const ForwardDynamicsResult r = forward_dynamics(q, v, tau, kNoForce, p, opts);
        const double expected = gyrostat_accel(tau[act::kWheel], opts.external[idx::kPitch], p);
        CHECK(std::abs(r.qddot[idx::kPitch] - expected) <= 1e-10);
        CHECK(r.qddot[idx::kWheel] == doctest::Approx(tau[act::kWheel] / p.wheel_inertia));
        CHECK(r.wheel_motor_torque == doctest::Approx(tau[act::kWheel] + p.wheel_inertia * r.qddot[idx::kPitch]));
    }
}

TEST_CASE("frozen legs add their pitch inertia")
{
    std::mt19937_64 rng(16);
    for (int n = 0; n < 10; ++n) {
        const Vec8 q = oracle::random_q(rng, kParams);
        Vec5 tau = Vec5::Zero();
        tau[act::kWheel] = 2.0;
        ForwardDynamicsOptions opts;
        opts.lock_legs = true;
        const double th = forward_dynamics(q, Vec8::Zero(), tau, kNoForce, kParams, opts).qddot[idx::kPitch];

        const Eigen::Matrix3d block = oracle::kinetic_hessian(q, kParams).topLeftCorner<3, 3>();
        const double inertia = 1.0 / block.inverse()(2, 2);
        CHECK(inertia > kParams.torso_inertia + kParams.wheel_inertia);
        CHECK(th == doctest::Approx(-2.0 / inertia).epsilon(1e-6));
    }
}

TEST_CASE("free massless legs cannot be solved")
{
    CHECK_THROWS_AS(forward_dynamics(standing_q(), Vec8::Zero(), Vec5::Zero(), kNoForce, massless_legs()), Error);
}

TEST_CASE("pinned foot gives the rigid pendulum")
{
    // Straight massless legs, foot pinned: torso and locked wheel swing as an
    // inverted pendulum of length leg_reach about the foot.
    const RobotParams p = massless_legs();
    ForwardDynamicsOptions opts;
    opts.lock_legs = true;
    const double m = p.torso_mass + p.wheel_mass;
    const double len = p.leg_reach();
    const double inertia = p.torso_inertia + p.wheel_inertia;

    for (double theta : {0.0, 0.2, -0.7, 1.3}) {
        for (double rate : {0.0, 0.8, -1.5}) {
            Vec8 q = Vec8::Zero();
            q[idx::kPitch] = theta;
            q[idx::kX] = -len * std::sin(theta);
            q[idx::kZ] = len * std::cos(theta);
            Vec8 v = Vec8::Zero();
            v[idx::kPitch] = rate;
            v[idx::kX] = -len * std::cos(theta) * rate;
            v[idx::kZ] = -len * std::sin(theta) * rate;

            const FootState foot = foot_states(q, v, p)[0];
            const double h = 1e-5;
            const Mat28 jp = foot_states(q + h * v, v, p)[0].jacobian;
            const Mat28 jm = foot_states(q - h * v, v, p)[0].jacobian;
            const Vec2 jdot_v = (jp - jm) * v / (2.0 * h);

            // Accelerations are affine in the foot force; solve for the pin force.
            auto accel = [&](const Vec2& f) {
                return forward_dynamics(q, v, Vec5::Zero(), {f, Vec2::Zero()}, p, opts).qddot;
            };
            const Vec8 a0 = accel(Vec2::Zero());
            Eigen::Matrix2d sens;
            sens.col(0) = foot.jacobian * (accel(Vec2(1.0, 0.0)) - a0);
            sens.col(1) = foot.jacobian * (accel(Vec2(0.0, 1.0)) - a0);
            const Vec2 f = sens.partialPivLu().solve(-jdot_v - foot.jacobian * a0);
            const double th_dd = accel(f)[idx::kPitch];

            const double expected = m * p.gravity * len * std::sin(theta) / (inertia + m * len * len);
            CHECK(std::abs(th_dd - expected) <= 1e-8);
        }
    }
}

TEST_CASE("foot kinematics")
{
    Vec8 q = Vec8::Zero();
    q[idx::kX] = 0.3;
    q[idx::kZ] = 1.2;
    FootPair f = foot_states(q, Vec8::Zero(), kParams);
    CHECK(f[0].position.x() == doctest::Approx(0.3));
    CHECK(f[0].position.y() == doctest::Approx(0.2));

    q[idx::kKneeL] = -kPi / 2.0;
    f = foot_states(q, Vec8::Zero(), kParams);
    CHECK(f[0].position.x() == doctest::Approx(0.3 - 0.5));
    CHECK(f[0].position.y() == doctest::Approx(1.2 - 0.5));
    CHECK(f[1].position.y() == doctest::Approx(0.2));
}

TEST_CASE("foot Jacobians match central differences")
{
    std::mt19937_64 rng(17);
    const double h = 1e-7;
    for (int n = 0; n < 100; ++n) {
        const Vec8 q = oracle::random_q(rng, kParams);
        const Vec8 v = oracle::random_qdot(rng);
        const FootPair feet = foot_states(q, v, kParams);
        for (int leg = 0; leg < 2; ++leg) {
            CHECK((feet[leg].position - oracle::foot(q, kParams, leg)).norm() <= 1e-12);
            Mat28 fd;
            for (int i = 0; i < 8; ++i) {
                fd.col(i) = (oracle::foot(q + h * Vec8::Unit(i), kParams, leg) -
                             oracle::foot(q - h * Vec8::Unit(i), kParams, leg)) /
                            (2.0 * h);
            }
            CHECK((feet[leg].jacobian - fd).cwiseAbs().maxCoeff() <= 1e-6);
            CHECK((feet[leg].velocity - feet[leg].jacobian * v).norm() <= 1e-12);
        }
    }
}

TEST_CASE("pitch momentum")
{
    Vec8 v = Vec8::Zero();
    v[idx::kPitch] = 1.0;
    const Vec8 q = standing_q();
    CHECK(total_pitch_momentum(q, v, kParams, true) == doctest::Approx(kParams.torso_inertia + kParams.wheel_inertia));

    v = Vec8::Zero();
    v[idx::kWheel] = 40.0;
    CHECK(total_pitch_momentum(q, v, kParams, true) == doctest::Approx(40.0 * kParams.wheel_inertia));
    CHECK(total_pitch_momentum(q, v, kParams) == doctest::Approx(40.0 * kParams.wheel_inertia));
}

TEST_CASE("full momentum about the centre of mass matches the segment sum")
{
    std::mt19937_64 rng(18);
    const double h = 1e-6;
    for (int n = 0; n < 20; ++n) {
        const Vec8 q = oracle::random_q(rng, kParams);
        const Vec8 v = oracle::random_qdot(rng);
        const auto s = oracle::segments(q, kParams);
        const auto sp = oracle::segments(q + h * v, kParams);
        const auto sm = oracle::segments(q - h * v, kParams);
        Vec2 com = Vec2::Zero();
        for (const auto& seg : s) com += seg.mass * seg.pos;
        com /= kParams.total_mass();
        CHECK((com - com_position(q, kParams)).norm() <= 1e-12);
        double hc = 0.0;
        for (int i = 0; i < 6; ++i) {
            const Vec2 vel = (sp[i].pos - sm[i].pos) / (2.0 * h);
            const double w = (sp[i].angle - sm[i].angle) / (2.0 * h);
            hc += s[i].mass * cross2(s[i].pos - com, vel) + s[i].inertia * w;
        }
        CHECK(total_pitch_momentum(q, v, kParams) == doctest::Approx(hc).epsilon(1e-7));
    }
}

TEST_CASE("torque-free flight conserves momentum")
{
    std::mt19937_64 rng(19);
    Vec8 q = oracle::random_q(rng, kParams);
    Vec8 v = oracle::random_qdot(rng, 1.0);
    v[idx::kWheel] = 0.0;
    Rk4 sim;
    const double h0 = total_pitch_momentum(q, v, kParams);
    const double vx0 = com_velocity(q, v, kParams).x();
    const double e0 = mechanical_energy(q, v, kParams).total();
    for (int k = 0; k < 10000; ++k) sim.step(q, v, 1e-4);
    CHECK(total_pitch_momentum(q, v, kParams) == doctest::Approx(h0).epsilon(1e-3));
    CHECK(std::abs(total_pitch_momentum(q, v, kParams) - h0) <= 1e-8);
    CHECK(std::abs(com_velocity(q, v, kParams).x() - vx0) <= 1e-10);
    CHECK(mechanical_energy(q, v, kParams).total() == doctest::Approx(e0).epsilon(1e-4));
}

TEST_CASE("gyrostat formula")
{
    RobotParams p;
    p.torso_inertia = 1.0;
    p.wheel_inertia = 0.5;
    CHECK(gyrostat_accel(0.0, 0.0, p) == 0.0);
    CHECK(gyrostat_accel(1.5, 0.0, p) == doctest::Approx(-1.0));
    CHECK(gyrostat_accel(0.7, 0.7, p) == 0.0);
}

TEST_CASE("mechanical energy special cases")
{
    const Vec8 q = standing_q();
    const double datum = com_position(q, kParams).y();
    const Energy rest = mechanical_energy(q, Vec8::Zero(), kParams, datum);
    CHECK(rest.kinetic == 0.0);
    CHECK(std::abs(rest.potential) <= 1e-12);

    Vec8 v = Vec8::Zero();
    v[idx::kWheel] = 30.0;
    CHECK(mechanical_energy(q, v, kParams).kinetic == doctest::Approx(0.5 * kParams.wheel_inertia * 900.0));
}

TEST_CASE("centroidal rows")
{
    std::mt19937_64 rng(20);
    const Vec8 q = oracle::random_q(rng, kParams);
    const Vec8 v = oracle::random_qdot(rng);
    const Mat38 a = centroidal_matrix(q, kParams);
    const Vec2 p = kParams.total_mass() * com_velocity(q, v, kParams);
    CHECK((a.topRows<2>() * v - p).norm() <= 1e-12);
    const double h = 1e-6;
    const Vec2 fd = (com_position(q + h * v, kParams) - com_position(q - h * v, kParams)) / (2.0 * h);
    CHECK((com_velocity(q, v, kParams) - fd).norm() <= 1e-8);
}
