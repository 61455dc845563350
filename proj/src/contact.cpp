#include "hopper/contact.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <cmath>

namespace hopper {

ValidationReport validate_contact_params(const ContactParams& p)
{
    ValidationReport r;
    if (!(p.stiffness > 0.0)) r.fail("contact stiffness must be positive");
    if (!(p.damping > 0.0)) r.fail("contact damping must be positive");
    if (!(p.friction >= 0.0)) r.fail("friction coefficient must be non-negative");
    if (!(p.slip_velocity > 0.0)) r.fail("friction regularization velocity must be positive");
    return r;
}

FootContact detect_contact(const FootState& foot, const TerrainProfile& terrain, double foot_radius)
{
    FootContact c;
    const double x = foot.position.x();
    const double slope = terrain.slope(x);
    const double norm = std::sqrt(1.0 + slope * slope);
    c.normal = Vec2(-slope, 1.0) / norm;
    const double gap = terrain.height(x) + foot_radius - foot.position.y();
    c.penetration = std::max(0.0, gap / norm);
    c.in_contact = c.penetration > 0.0;
    c.contact_point = foot.position - foot_radius * c.normal;
    return c;
}

FootContact contact_force(FootContact c, const Vec2& foot_velocity, const ContactParams& p)
{
    c.normal_force = 0.0;
    c.tangential_force = 0.0;
    c.force.setZero();
    if (!c.in_contact) return c;
    const double vn = foot_velocity.dot(c.normal);
    const double vt = foot_velocity.dot(c.tangent());
    c.normal_force = std::max(0.0, p.stiffness * c.penetration + p.damping * std::max(0.0, -vn));
    c.tangential_force = -p.friction * c.normal_force * std::tanh(vt / p.slip_velocity);
    c.force = c.normal_force * c.normal + c.tangential_force * c.tangent();
    return c;
}

Mat2 contact_damping(const FootContact& c, const Vec2& foot_velocity, const ContactParams& p)
{
    if (!c.in_contact) return Mat2::Zero();
    const Vec2 n = c.normal;
    const Vec2 t = c.tangent();
    const double vn = foot_velocity.dot(n);
    const double fn = p.stiffness * c.penetration + p.damping * std::max(0.0, -vn);
    if (fn <= 0.0) return Mat2::Zero();
    const double cn = vn < 0.0 ? p.damping : 0.0;
    const double th = std::tanh(foot_velocity.dot(t) / p.slip_velocity);
    const double ct = p.friction * fn * (1.0 - th * th) / p.slip_velocity;
    return cn * n * n.transpose() + ct * t * t.transpose();
}

ContactState evaluate_contacts(const FootPair& feet, const TerrainProfile& terrain, const RobotParams& robot,
                               const ContactParams& params)
{
    ContactState cs;
    for (int leg = 0; leg < 2; ++leg) {
        cs[leg] = contact_force(detect_contact(feet[leg], terrain, robot.foot_radius), feet[leg].velocity, params);
    }
    return cs;
}

ImpactResult impact_map(const Vec8& qdot_minus, const ConstraintRows& rows, const Mat8& mass,
                        const std::array<bool, 8>& held)
{
    ImpactResult r;
    r.qdot = qdot_minus;
    if (rows.rows() == 0) return r;

    std::array<int, 8> free_idx{};
    int n = 0;
    for (int i = 0; i < 8; ++i)
        if (!held[i]) free_idx[n++] = i;

    using MatN = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, 8, 8>;
    using RowsN = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, 4, 8>;
    MatN m(n, n);
    RowsN j(rows.rows(), n);
    for (int a = 0; a < n; ++a) {
        for (int b = 0; b < n; ++b) m(a, b) = mass(free_idx[a], free_idx[b]);
        j.col(a) = rows.col(free_idx[a]);
    }
    const Eigen::LLT<MatN> m_llt(m);
    if (m_llt.info() != Eigen::Success) {
        r.singular = true;
        return r;
    }
    const MatN minv_jt = m_llt.solve(j.transpose());
    const Eigen::MatrixXd lambda = j * minv_jt;

    // Reject ill-conditioned contact-space inertia (e.g. duplicate rows).
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(lambda, Eigen::EigenvaluesOnly);
    const double lo = es.eigenvalues().minCoeff();
    const double hi = es.eigenvalues().maxCoeff();
    if (!(lo > 1e-12 * std::max(hi, 1.0))) {
        r.singular = true;
        return r;
    }
    const Eigen::VectorXd v = rows * qdot_minus;
    const Eigen::VectorXd impulse = lambda.ldlt().solve(v);
    const Eigen::VectorXd dq = minv_jt * impulse;
    for (int a = 0; a < n; ++a) r.qdot[free_idx[a]] -= dq[a];
    return r;
}

}  // namespace hopper
