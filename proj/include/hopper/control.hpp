#pragma once

#include "hopper/contact.hpp"
#include "hopper/dynamics.hpp"
#include "hopper/model.hpp"

#include <array>
#include <optional>
#include <string_view>

namespace hopper {

enum class HopperPhase { kLanding, kStanceStabilize, kCrouchLoad, kPushOff, kFlight };

std::string_view phase_name(HopperPhase phase);
std::optional<HopperPhase> parse_phase(std::string_view name);
HopperPhase next_phase(HopperPhase phase);
inline bool is_stance(HopperPhase p) { return p != HopperPhase::kFlight; }

struct ControllerState {
    double integral_error = 0.0;   // rad s
    double previous_error = 0.0;   // rad
    double wheel_speed = 0.0;      // rad/s, relative to torso
    double saturation_accumulator = 0.0;  // s at >= 98 % of the torque limit, this hop
};

// ---------------------------------------------------------------------------
// Flight attitude loop

/// Fraction of the torque limit counted as saturated.
constexpr double kSaturationFraction = 0.98;

struct PidOutput {
    double torque = 0.0;
    ControllerState state;
    bool clamped = false;
};

/// PID on torso pitch (error e = theta, target upright). The output is the
/// wheel channel command: positive torque spins the wheel forward and pitches
/// the torso back, so tau_w = +(Kp e + Kd e_dot + Ki int e) closes a stable
/// loop through (I_b + I_w) theta_ddot = -tau_w. Output clamps to +-tau_max and
/// the integrator freezes while clamped.
PidOutput pid_attitude_torque(const ControllerState& cs, double theta, double theta_dot, double dt,
                              const PidGains& gains, double tau_max, double integral_limit);

/// Routh-Hurwitz test of I s^3 + Kd s^2 + Kp s + Ki (or I s^2 + Kd s + Kp
/// when Ki = 0).
bool closed_loop_stable(const PidGains& gains, double pitch_inertia);

/// Zeroes torque that would push the wheel further past its speed limit and
/// clamps to the torque limit.
double limit_wheel_torque(double torque, double wheel_speed, const RobotParams& params);

// ---------------------------------------------------------------------------
// Stance desaturation

struct DesaturationParams {
    double gain = 0.05;          // N m s
    double torque_limit = 5.0;   // N m
    bool operator==(const DesaturationParams&) const = default;
};

double desaturation_torque(double wheel_speed, HopperPhase phase, const DesaturationParams& params);

// ---------------------------------------------------------------------------
// Legs

struct LegPdGains {
    double kp = 50.0;
    double kd = 2.0;
    bool operator==(const LegPdGains&) const = default;
};

struct StanceForceGains {
    double stiffness = 4.0;    // hip, 1/s^2 (scaled by total mass)
    double damping = 8.0;     // hip, 1/s
    double pitch_kp = 20.0;   // N m/rad
    double pitch_kd = 3.0;    // N m s/rad
    bool operator==(const StanceForceGains&) const = default;
};

struct GaitParams {
    double crouch_depth = 0.15;        // hip drop during CrouchLoad, m
    double crouch_lean = 0.05;         // forward hip shift during CrouchLoad, m
    double crouch_duration = 1.2;      // s
    double pushoff_duration = 0.05;    // knee-rate ramp-in time, s
    double pushoff_knee_rate = 4.0;    // rad/s
    double pushoff_final_knee = -0.6;  // extension stop for the virtual leg, rad
    double pushoff_angle = 0.6;        // thrust tilt ahead of vertical, rad
    double stand_offset = 0.0;         // hip ahead of the foot centroid after settling, m
    double stand_height = 0.85;        // hip above the foot centres after settling, m
    double stance_settle_threshold = 0.05;  // rad/s
    double stance_min_duration = 0.3;  // s
    double landing_dwell = 0.03;       // s
    double stance_watchdog = 5.0;      // s
    LegPdGains landing_gains{20.0, 2.0};
    LegPdGains stance_gains{6.0, 0.6};
    LegPdGains flight_gains{8.0, 0.8};
    LegPdGains pushoff_gains{60.0, 3.0};
    StanceForceGains support;
    Vec4 flight_posture = Vec4::Zero();  // hip_L, knee_L, hip_R, knee_R
    double flight_blend = 0.25;        // s to swing from the lift-off posture to flight_posture

    bool operator==(const GaitParams&) const = default;
};

GaitParams default_gait_params(const RobotParams& params);

ValidationReport validate_gait_params(const GaitParams& gait, const RobotParams& params);

/// Foot position relative to the hip in the torso frame.
Vec2 leg_forward_kinematics(double hip, double knee, const RobotParams& params);

struct LegIk {
    double hip = 0.0;
    double knee = 0.0;
    bool feasible = true;
};

/// Two-link inverse kinematics, knee-flexed branch (knee <= 0). Targets out of
/// reach are pulled onto the workspace boundary and reported infeasible.
LegIk leg_inverse_kinematics(const Vec2& foot, const RobotParams& params);

/// Joint posture placing the feet at hip-relative torso-frame targets.
Vec4 posture_for_feet(const Vec2& left_foot, const Vec2& right_foot, const RobotParams& params,
                      bool* feasible = nullptr);

struct JointTargets {
    Vec4 q = Vec4::Zero();
    bool clamped = false;  // IK infeasible or joint range hit
    double pitch = 0.0;    // torso pitch reference, rad
};

/// Snapshot taken on entry to a stance segment: Landing and StanceStabilize
/// capture their own entry, CrouchLoad captures the crouch start and PushOff
/// keeps it.
struct StanceAnchor {
    Vec4 joints = Vec4::Zero();
    std::array<Vec2, 2> feet{Vec2::Zero(), Vec2::Zero()};  // foot centres, world
    Vec2 hip = Vec2::Zero();                               // world
    double pitch = 0.0;
    bool operator==(const StanceAnchor&) const = default;
};

StanceAnchor capture_stance_anchor(const GenState& state, const RobotParams& params);

/// World-frame stance reference over the anchored feet. Landing holds the
/// touchdown state. StanceStabilize eases the hip to the standing point over the
/// feet (resting on the terrain) and the pitch to zero. CrouchLoad eases
/// the hip down by crouch_depth and forward by crouch_lean. PushOff drives the
/// hip along the thrust direction as the virtual leg extends at
/// pushoff_knee_rate.
struct StanceReference {
    std::array<Vec2, 2> feet{Vec2::Zero(), Vec2::Zero()};
    Vec2 hip = Vec2::Zero();
    Vec2 hip_velocity = Vec2::Zero();
    double pitch = 0.0;
    bool hold = false;  // keep the anchored joint posture
};

StanceReference stance_reference(HopperPhase phase, double time_in_phase, const GaitParams& gait,
                                 const StanceAnchor& anchor, const TerrainProfile& terrain,
                                 const RobotParams& params);

/// Joint setpoints placing the reference hip over the reference feet, solved
/// in the measured torso frame.
JointTargets stance_joint_targets(HopperPhase phase, double time_in_phase, const GaitParams& gait,
                                  const StanceAnchor& anchor, const TerrainProfile& terrain,
                                  const RobotParams& params, double measured_pitch);

/// Leg torques pressing the loaded feet with weight support plus a hip
/// spring-damper toward the reference (when `track_hip`), clipped to the
/// friction cone, added to `posture`. The hip torques are then shifted so
/// their sum is a torso pitch spring-damper.
Vec4 stance_force_torques(const GenState& state, const FootPair& feet, const std::array<double, 2>& normal_force,
                          const StanceReference& reference, const StanceForceGains& gains, bool track_hip,
                          double friction, const RobotParams& params, const Vec4& posture = Vec4::Zero());

/// Flight leg setpoints: eases from the lift-off posture to flight_posture.
Vec4 flight_joint_targets(double time_in_phase, const GaitParams& gait, const Vec4& liftoff_posture);

Vec4 joint_pd_torques(const Vec4& setpoints, const Vec4& q, const Vec4& qdot, const LegPdGains& gains,
                      double torque_limit);

// ---------------------------------------------------------------------------
// Gait state machine

struct PhaseDecision {
    HopperPhase phase = HopperPhase::kStanceStabilize;
    bool changed = false;
    bool watchdog = false;  // stance phase overran the watchdog
};

PhaseDecision phase_transition(HopperPhase phase, double time_in_phase, const ContactState& contact,
                               const GenState& state, const GaitParams& gait);

}  // namespace hopper
