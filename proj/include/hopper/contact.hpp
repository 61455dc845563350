#pragma once

#include "hopper/dynamics.hpp"
#include "hopper/terrain.hpp"

#include <Eigen/Core>

#include <array>

namespace hopper {

/// Compliant point-contact model: spring-damper normal force, regularized
/// Coulomb friction.
struct ContactParams {
    double stiffness = 2.0e4;  // N/m
    double damping = 200.0;    // N s/m
    double friction = 0.8;
    double slip_velocity = 0.01;  // tanh regularization, m/s
    bool operator==(const ContactParams&) const = default;
};

ValidationReport validate_contact_params(const ContactParams& params);

struct FootContact {
    bool in_contact = false;
    double penetration = 0.0;
    Vec2 contact_point = Vec2::Zero();
    Vec2 normal = Vec2(0.0, 1.0);
    double normal_force = 0.0;
    double tangential_force = 0.0;
    Vec2 force = Vec2::Zero();  // world frame, applied at the foot centre

    Vec2 tangent() const { return {normal.y(), -normal.x()}; }
};

using ContactState = std::array<FootContact, 2>;

/// Geometric contact between the foot sphere and the terrain slice; forces unset.
FootContact detect_contact(const FootState& foot, const TerrainProfile& terrain, double foot_radius);

/// Fills in normal and friction forces for a detected contact.
FootContact contact_force(FootContact contact, const Vec2& foot_velocity, const ContactParams& params);

/// Velocity sensitivity of the contact law, world frame: c_n n n^T + c_t t t^T
/// with c_n = -dF_n/dv_n and c_t = -dF_t/dv_t. Symmetric positive
/// semi-definite; zero when not in contact.
Mat2 contact_damping(const FootContact& contact, const Vec2& foot_velocity, const ContactParams& params);

ContactState evaluate_contacts(const FootPair& feet, const TerrainProfile& terrain, const RobotParams& robot,
                               const ContactParams& params);

/// Flight means no foot carries normal load.
inline bool airborne(const ContactState& cs) { return cs[0].normal_force <= 0.0 && cs[1].normal_force <= 0.0; }

inline ForcePair contact_forces(const ContactState& cs) { return {cs[0].force, cs[1].force}; }

using ConstraintRows = Eigen::Matrix<double, Eigen::Dynamic, 8, 0, 4, 8>;

struct ImpactResult {
    Vec8 qdot = Vec8::Zero();
    bool singular = false;  // map skipped, velocities unchanged
};

/// Plastic impact: removes the constraint-space velocity J qdot with the
/// minimal kinetic-energy change,
///   qdot+ = qdot- - M^-1 J^T (J M^-1 J^T)^-1 J qdot-.
/// Coordinates flagged in `held` keep their velocity (they are servo-driven and
/// cannot jump); the map then acts on the remaining block of M.
ImpactResult impact_map(const Vec8& qdot_minus, const ConstraintRows& rows, const Mat8& mass,
                        const std::array<bool, 8>& held = {});

}  // namespace hopper
