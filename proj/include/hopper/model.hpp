#pragma once

#include <Eigen/Core>

#include <array>
#include <stdexcept>
#include <string>
#include <vector>

namespace hopper {

using Vec2 = Eigen::Vector2d;
using Vec4 = Eigen::Vector4d;
using Vec5 = Eigen::Matrix<double, 5, 1>;
using Vec8 = Eigen::Matrix<double, 8, 1>;
using Mat2 = Eigen::Matrix2d;
using Mat8 = Eigen::Matrix<double, 8, 8>;
using Mat28 = Eigen::Matrix<double, 2, 8>;
using Mat38 = Eigen::Matrix<double, 3, 8>;
using Mat85 = Eigen::Matrix<double, 8, 5>;

constexpr double kPi = 3.14159265358979323846;
constexpr double kMoonGravity = 1.625;

inline constexpr double deg2rad(double deg) { return deg * kPi / 180.0; }
inline constexpr double rad2deg(double rad) { return rad * 180.0 / kPi; }
inline constexpr double rpm2radps(double rpm) { return rpm * 2.0 * kPi / 60.0; }

// Generalized coordinate layout: [x, z, theta, phi_w, hip_L, knee_L, hip_R, knee_R].
// x, z locate the torso centre of mass (the wheel is concentric with it and the
// hips sit on it); theta is torso pitch (counter-clockwise positive with x
// forward and z up); phi_w is the wheel angle relative to the torso.
namespace idx {
constexpr int kX = 0;
constexpr int kZ = 1;
constexpr int kPitch = 2;
constexpr int kWheel = 3;
constexpr int kHipL = 4;
constexpr int kKneeL = 5;
constexpr int kHipR = 6;
constexpr int kKneeR = 7;
constexpr int kDof = 8;

constexpr int hip(int leg) { return kHipL + 2 * leg; }
constexpr int knee(int leg) { return kKneeL + 2 * leg; }
}  // namespace idx

// Actuator layout: [tau_w, tau_hL, tau_kL, tau_hR, tau_kR].
namespace act {
constexpr int kWheel = 0;
constexpr int kCount = 5;
}  // namespace act

enum class Leg { kLeft = 0, kRight = 1 };
constexpr std::array<Leg, 2> kLegs{Leg::kLeft, Leg::kRight};

struct JointRange {
    double lo = 0.0;
    double hi = 0.0;

    bool contains(double v) const { return v >= lo && v <= hi; }
    double clamp(double v) const { return v < lo ? lo : (v > hi ? hi : v); }
    bool operator==(const JointRange&) const = default;
};

/// Physical and actuator parameters of the planar hopper. Defaults reproduce
/// the published build (8.2 kg total, 0.5 m leg segments, lunar gravity).
struct RobotParams {
    double torso_mass = 4.0;
    double wheel_mass = 3.0;
    double upper_leg_mass = 0.4;  // per leg
    double lower_leg_mass = 0.2;  // per leg
    double upper_leg_length = 0.5;
    double lower_leg_length = 0.5;
    double torso_inertia = 0.0;  // filled by default_robot_params()
    double wheel_inertia = 0.0;
    JointRange hip_range{deg2rad(-120.0), deg2rad(120.0)};
    JointRange knee_range{deg2rad(-160.0), 0.0};
    double wheel_torque_limit = 29.5;
    double wheel_speed_limit = rpm2radps(6000.0);
    double gear_ratio = 30.0;
    double leg_torque_limit = 40.0;
    double foot_radius = 0.04;
    double gravity = kMoonGravity;

    double total_mass() const { return torso_mass + wheel_mass + 2.0 * (upper_leg_mass + lower_leg_mass); }
    double leg_reach() const { return upper_leg_length + lower_leg_length; }
    const JointRange& range_of(int coord) const { return (coord % 2 == 0) ? hip_range : knee_range; }

    bool operator==(const RobotParams&) const = default;
};

// Torso treated as a solid cuboid with a 0.30 m x 0.20 m sagittal footprint,
// the wheel as a solid disc of radius 0.12 m.
constexpr double kTorsoBoxLength = 0.30;
constexpr double kTorsoBoxHeight = 0.20;
constexpr double kWheelRadius = 0.12;

double cuboid_pitch_inertia(double mass, double length, double height);
double disc_inertia(double mass, double radius);

RobotParams default_robot_params();

struct GenState {
    Vec8 q = Vec8::Zero();
    Vec8 qdot = Vec8::Zero();

    double pitch() const { return q[idx::kPitch]; }
    double pitch_rate() const { return qdot[idx::kPitch]; }
    double wheel_speed() const { return qdot[idx::kWheel]; }
    Vec4 joints() const { return q.tail<4>(); }
    Vec4 joint_rates() const { return qdot.tail<4>(); }
    bool finite() const { return q.allFinite() && qdot.allFinite(); }
};

struct PidGains {
    double kp = 60.0;
    double kd = 18.0;
    double ki = 4.0;
    bool operator==(const PidGains&) const = default;
};

struct ValidationReport {
    std::vector<std::string> failures;
    std::vector<std::string> warnings;

    bool passed() const { return failures.empty(); }
    void fail(std::string msg) { failures.push_back(std::move(msg)); }
    void warn(std::string msg) { warnings.push_back(std::move(msg)); }
    void merge(const ValidationReport& other);
    std::string to_string() const;
};

ValidationReport validate_parameters(const RobotParams& params);

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace hopper
