#pragma once

#include "hopper/model.hpp"

#include <array>

namespace hopper {

/// Position, velocity and translational Jacobian of one foot centre.
struct FootState {
    Vec2 position = Vec2::Zero();
    Vec2 velocity = Vec2::Zero();
    Mat28 jacobian = Mat28::Zero();
};

using FootPair = std::array<FootState, 2>;
using ForcePair = std::array<Vec2, 2>;

/// Rigid segment of the planar tree, evaluated at one configuration.
struct BodyFrame {
    double mass = 0.0;
    double inertia = 0.0;  // about its own centroid
    Vec2 position = Vec2::Zero();
    Mat28 jv = Mat28::Zero();                      // d(position)/dq
    Eigen::Matrix<double, 1, 8> jw = Eigen::Matrix<double, 1, 8>::Zero();  // d(angle)/dq
    Vec2 jdot_qdot = Vec2::Zero();                 // velocity-product acceleration
};

// torso, wheel, upper L, lower L, upper R, lower R
constexpr int kBodyCount = 6;
using BodyFrames = std::array<BodyFrame, kBodyCount>;

BodyFrames body_frames(const Vec8& q, const Vec8& qdot, const RobotParams& params);

struct DynamicsTerms {
    Mat8 mass = Mat8::Zero();
    Vec8 bias = Vec8::Zero();  // C(q, qdot) qdot + G(q)
    Mat85 actuation = Mat85::Zero();
    std::array<Mat28, 2> contact_jacobian{Mat28::Zero(), Mat28::Zero()};
};

DynamicsTerms dynamics_terms(const Vec8& q, const Vec8& qdot, const RobotParams& params);

Mat8 mass_matrix(const Vec8& q, const RobotParams& params);
Vec8 bias_terms(const Vec8& q, const Vec8& qdot, const RobotParams& params);
Vec8 gravity_terms(const Vec8& q, const RobotParams& params);
Mat85 actuation_map();

struct Conditioning {
    double condition_number = 1.0;
    double min_eigenvalue = 0.0;
    bool singular = false;  // condition number above 1e12
};

Conditioning mass_matrix_conditioning(const Mat8& mass);

FootPair foot_states(const Vec8& q, const Vec8& qdot, const RobotParams& params);

struct ForwardDynamicsOptions {
    // Hold hip and knee joints rigid (zero joint acceleration).
    bool lock_legs = false;
    // Additional generalized forces, e.g. an external pitch torque on theta.
    Vec8 external = Vec8::Zero();
    // Generalized damping C (symmetric, positive semi-definite) whose force
    // increment -C qddot dt over the step is taken implicitly: the solve uses
    // M + dt C in place of M.
    Mat8 implicit_damping = Mat8::Zero();
    double implicit_dt = 0.0;
};

struct ForwardDynamicsResult {
    Vec8 qddot = Vec8::Zero();
    // Motor torque between torso and wheel that realizes the commanded wheel
    // momentum rate. It enters M qddot = B tau + Jc^T f - bias as tau[0].
    double wheel_motor_torque = 0.0;
};

/// Solves M qddot = B tau + sum Jc^T f - bias.
///
/// The wheel channel tau[0] is a commanded rate of wheel momentum relative to
/// the torso, I_w * phi_w_ddot. The equal-and-opposite motor torque that
/// produces it is solved for alongside qddot, so the torso sees
/// (I_b + I_w) theta_ddot = tau_ext - tau_w when the legs carry no mass.
/// Throws hopper::Error if the reduced inertia matrix cannot be factored.
ForwardDynamicsResult forward_dynamics(const Vec8& q, const Vec8& qdot, const Vec5& tau, const ForcePair& f_contact,
                                       const RobotParams& params, const ForwardDynamicsOptions& opts = {});

/// Angular momentum about the pitch axis. The full form is taken about the
/// system centre of mass and includes the legs; the reduced form is the
/// torso-and-wheel expression I_b theta_dot + I_w (theta_dot + phi_w_dot).
double total_pitch_momentum(const Vec8& q, const Vec8& qdot, const RobotParams& params, bool reduced = false);

/// Pitch acceleration of the torso-wheel gyrostat.
double gyrostat_accel(double tau_w, double tau_ext, const RobotParams& params);

struct Energy {
    double kinetic = 0.0;
    double potential = 0.0;
    double total() const { return kinetic + potential; }
};

Energy mechanical_energy(const Vec8& q, const Vec8& qdot, const RobotParams& params, double datum = 0.0);

Vec2 com_position(const Vec8& q, const RobotParams& params);
Vec2 com_velocity(const Vec8& q, const Vec8& qdot, const RobotParams& params);

/// Rows: linear momentum x, linear momentum z, angular momentum about the CoM.
Mat38 centroidal_matrix(const Vec8& q, const RobotParams& params);

// Planar cross product r x v (scalar, counter-clockwise positive).
inline double cross2(const Vec2& r, const Vec2& v) { return r.x() * v.y() - r.y() * v.x(); }

}  // namespace hopper
