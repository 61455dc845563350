#include <doctest.h>

#include "hopper/contact.hpp"
#include "oracles.hpp"

#include <cmath>
#include <random>

using namespace hopper;

namespace {

FootState foot_at(double x, double z, double vx = 0.0, double vz = 0.0)
{
    FootState f;
    f.position = Vec2(x, z);
    f.velocity = Vec2(vx, vz);
    return f;
}

TerrainProfile incline(double degrees)
{
    std::vector<double> s(101);
    for (std::size_t i = 0; i < s.size(); ++i) s[i] = 0.1 * static_cast<double>(i) * std::tan(deg2rad(degrees));
    return TerrainProfile(0.1, s);
}

}  // namespace

TEST_CASE("foot above flat ground is free")
{
    const TerrainProfile flat = TerrainProfile::flat(10.0);
    const FootContact c = detect_contact(foot_at(1.0, 0.14), flat, 0.04);
    CHECK_FALSE(c.in_contact);
    CHECK(c.penetration == 0.0);
}

TEST_CASE("grazing foot has zero penetration")
{
    const TerrainProfile flat = TerrainProfile::flat(10.0, 0.25);
    const FootContact c = detect_contact(foot_at(1.0, 0.29), flat, 0.04);
    CHECK(c.penetration == doctest::Approx(0.0));
    CHECK_FALSE(contact_force(c, Vec2::Zero(), ContactParams{}).normal_force > 1e-9);
}

TEST_CASE("slope normal")
{
    const TerrainProfile slope = incline(10.0);
    const double x = 4.05;
    const FootContact c = detect_contact(foot_at(x, slope.height(x) + 0.03), slope, 0.04);
    CHECK(std::abs(c.normal.x() + std::sin(deg2rad(10.0))) <= 1e-9);
    CHECK(std::abs(c.normal.y() - std::cos(deg2rad(10.0))) <= 1e-9);
    CHECK(c.in_contact);
    // Vertical overlap of 1 cm measured along the normal.
    CHECK(c.penetration == doctest::Approx(0.01 * std::cos(deg2rad(10.0))).epsilon(1e-9));
    CHECK(c.tangent().dot(c.normal) == doctest::Approx(0.0));
}

TEST_CASE("spring force from penetration")
{
    ContactParams p;
    p.stiffness = 1e4;
    const TerrainProfile flat = TerrainProfile::flat(10.0);
    const FootContact c = contact_force(detect_contact(foot_at(1.0, 0.039), flat, 0.04), Vec2::Zero(), p);
    CHECK(c.normal_force == doctest::Approx(10.0).epsilon(1e-9));
    CHECK(c.tangential_force == 0.0);
    CHECK(c.force.y() == doctest::Approx(10.0).epsilon(1e-9));
}

TEST_CASE("no penetration, no force")
{
    FootContact c;
    c = contact_force(c, Vec2(1.0, -3.0), ContactParams{});
    CHECK(c.normal_force == 0.0);
    CHECK(c.tangential_force == 0.0);
    CHECK(c.force.norm() == 0.0);
}

TEST_CASE("withdrawal never pulls")
{
    ContactParams p;
    const TerrainProfile flat = TerrainProfile::flat(10.0);
    const FootContact geom = detect_contact(foot_at(1.0, 0.035), flat, 0.04);
    const FootContact fast = contact_force(geom, Vec2(0.0, 50.0), p);
    CHECK(fast.normal_force == doctest::Approx(p.stiffness * 0.005));
    const FootContact press = contact_force(geom, Vec2(0.0, -0.1), p);
    CHECK(press.normal_force == doctest::Approx(p.stiffness * 0.005 + p.damping * 0.1));
}

TEST_CASE("friction stays inside the cone and opposes slip")
{
    ContactParams p;
    const TerrainProfile slope = incline(10.0);
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    for (int n = 0; n < 200; ++n) {
        const double x = 3.0 + u(rng);
        const FootContact geom = detect_contact(foot_at(x, slope.height(x) + 0.03), slope, 0.04);
        const Vec2 v(u(rng), u(rng));
        const FootContact c = contact_force(geom, v, p);
        CHECK(c.normal_force >= 0.0);
        CHECK(std::abs(c.tangential_force) <= p.friction * c.normal_force + 1e-12);
        CHECK(c.tangential_force * v.dot(c.tangent()) <= 0.0);
        CHECK((c.force - (c.normal_force * c.normal + c.tangential_force * c.tangent())).norm() <= 1e-12);
    }
}

TEST_CASE("damping matrix is the velocity sensitivity")
{
    ContactParams p;
    const TerrainProfile slope = incline(10.0);
    const double x = 2.0;
    const FootContact geom = detect_contact(foot_at(x, slope.height(x) + 0.035), slope, 0.04);
    const Vec2 v(0.004, -0.02);
    const Mat2 c = contact_damping(geom, v, p);
    const double h = 1e-7;
    Mat2 fd;
    for (int i = 0; i < 2; ++i) {
        const Vec2 dv = h * Vec2::Unit(i);
        fd.col(i) = -(contact_force(geom, v + dv, p).force - contact_force(geom, v - dv, p).force) / (2.0 * h);
    }
    // The law is c_n n n^T + c_t t t^T; the off-diagonal cross term through F_n in F_t is dropped.
    const Vec2 n = geom.normal;
    const Vec2 t = geom.tangent();
    CHECK(n.dot(c * n) == doctest::Approx(n.dot(fd * n)).epsilon(1e-6));
    CHECK(t.dot(c * t) == doctest::Approx(t.dot(fd * t)).epsilon(1e-6));
    CHECK((c - c.transpose()).norm() <= 1e-12);
    CHECK(contact_damping(FootContact{}, v, p).norm() == 0.0);
}

TEST_CASE("impact map fixed point")
{
    const RobotParams p = default_robot_params();
    std::mt19937_64 rng(5);
    const Vec8 q = oracle::random_q(rng, p);
    const FootPair feet = foot_states(q, Vec8::Zero(), p);
    ConstraintRows rows(1, 8);
    rows.row(0) = Vec2(0.0, 1.0).transpose() * feet[0].jacobian;
    Vec8 v = oracle::random_qdot(rng);
    // Project out the constrained direction in the Euclidean metric.
    const Vec8 r = rows.row(0).transpose();
    v -= r * (r.dot(v) / r.squaredNorm());
    const ImpactResult out = impact_map(v, rows, mass_matrix(q, p));
    CHECK_FALSE(out.singular);
    CHECK((out.qdot - v).norm() <= 1e-12);
}

TEST_CASE("falling point mass stops")
{
    Mat8 m = Mat8::Identity() * 2.5;
    ConstraintRows rows(1, 8);
    rows.setZero();
    rows(0, idx::kZ) = 1.0;
    Vec8 v = Vec8::Zero();
    v[idx::kX] = 0.4;
    v[idx::kZ] = -1.0;
    const ImpactResult out = impact_map(v, rows, m);
    CHECK(out.qdot[idx::kZ] == doctest::Approx(0.0));
    CHECK(out.qdot[idx::kX] == doctest::Approx(0.4));
}

TEST_CASE("impact map dissipates and zeroes the constrained velocity")
{
    const RobotParams p = default_robot_params();
    std::mt19937_64 rng(6);
    for (int n = 0; n < 300; ++n) {
        const Vec8 q = oracle::random_q(rng, p);
        const Vec8 v = oracle::random_qdot(rng);
        const Mat8 m = mass_matrix(q, p);
        const FootPair feet = foot_states(q, Vec8::Zero(), p);
        ConstraintRows rows(n % 2 + 1, 8);
        for (int i = 0; i < rows.rows(); ++i) rows.row(i) = Vec2(0.1, 1.0).normalized().transpose() * feet[i].jacobian;
        std::array<bool, 8> held{};
        held[idx::kWheel] = n % 3 == 0;
        const ImpactResult out = impact_map(v, rows, m, held);
        if (out.singular) continue;
        CHECK(0.5 * out.qdot.dot(m * out.qdot) <= 0.5 * v.dot(m * v) * (1.0 + 1e-12));
        CHECK((rows * out.qdot).norm() <= 1e-9);
        if (held[idx::kWheel]) CHECK(out.qdot[idx::kWheel] == v[idx::kWheel]);
    }
}

TEST_CASE("duplicate rows are singular")
{
    const RobotParams p = default_robot_params();
    Vec8 q = Vec8::Zero();
    q[idx::kZ] = 1.0;
    const FootPair feet = foot_states(q, Vec8::Zero(), p);
    ConstraintRows rows(2, 8);
    rows.row(0) = Vec2(0.0, 1.0).transpose() * feet[0].jacobian;
    rows.row(1) = rows.row(0);
    Vec8 v = Vec8::Zero();
    v[idx::kZ] = -1.0;
    const ImpactResult out = impact_map(v, rows, mass_matrix(q, p));
    CHECK(out.singular);
    CHECK(out.qdot == v);
}

TEST_CASE("evaluate_contacts and airborne")
{
    const RobotParams p = default_robot_params();
    const TerrainProfile flat = TerrainProfile::flat(10.0);
    FootPair feet{foot_at(1.0, 0.5), foot_at(1.2, 0.5)};
    ContactState cs = evaluate_contacts(feet, flat, p, ContactParams{});
    CHECK(airborne(cs));
    feet[1] = foot_at(1.2, 0.03);
    cs = evaluate_contacts(feet, flat, p, ContactParams{});
    CHECK_FALSE(airborne(cs));
    CHECK(contact_forces(cs)[1].y() == doctest::Approx(200.0));
}

TEST_CASE("contact parameter validation")
{
    CHECK(validate_contact_params(ContactParams{}).passed());
    ContactParams p;
    p.stiffness = 0.0;
    CHECK_FALSE(validate_contact_params(p).passed());
}
