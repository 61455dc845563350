#include "hopper/model.hpp"

#include <cmath>
#include <sstream>

namespace hopper {

double cuboid_pitch_inertia(double mass, double length, double height)
{
    return mass * (length * length + height * height) / 12.0;
}

double disc_inertia(double mass, double radius) { return 0.5 * mass * radius * radius; }

RobotParams default_robot_params()
{
    RobotParams p;
    p.torso_inertia = cuboid_pitch_inertia(p.torso_mass, kTorsoBoxLength, kTorsoBoxHeight);
    p.wheel_inertia = disc_inertia(p.wheel_mass, kWheelRadius);
    return p;
}

void ValidationReport::merge(const ValidationReport& other)
{
    failures.insert(failures.end(), other.failures.begin(), other.failures.end());
    warnings.insert(warnings.end(), other.warnings.begin(), other.warnings.end());
}

std::string ValidationReport::to_string() const
{
    std::ostringstream os;
    os << (passed() ? "PASS" : "FAIL");
    for (const auto& f : failures) os << "\n  error: " << f;
    for (const auto& w : warnings) os << "\n  warning: " << w;
    return os.str();
}

namespace {

void require_positive(ValidationReport& r, const char* name, double v, const char* kind)
{
    if (!std::isfinite(v) || v <= 0.0) {
        std::ostringstream os;
        os << "non-positive " << kind << ": " << name << " = " << v;
        r.fail(os.str());
    }
}

void require_ordered(ValidationReport& r, const char* name, const JointRange& range)
{
    if (!(range.lo < range.hi)) {
        std::ostringstream os;
        os << "unordered range: " << name << " = [" << range.lo << ", " << range.hi << "]";
        r.fail(os.str());
    }
}

}  // namespace

ValidationReport validate_parameters(const RobotParams& p)
{
    ValidationReport r;
    require_positive(r, "torso_mass", p.torso_mass, "mass");
    require_positive(r, "wheel_mass", p.wheel_mass, "mass");
    require_positive(r, "upper_leg_mass", p.upper_leg_mass, "mass");
    require_positive(r, "lower_leg_mass", p.lower_leg_mass, "mass");
    require_positive(r, "upper_leg_length", p.upper_leg_length, "length");
    require_positive(r, "lower_leg_length", p.lower_leg_length, "length");
    require_positive(r, "foot_radius", p.foot_radius, "length");
    require_positive(r, "torso_inertia", p.torso_inertia, "inertia");
    require_positive(r, "wheel_inertia", p.wheel_inertia, "inertia");
    require_positive(r, "wheel_torque_limit", p.wheel_torque_limit, "limit");
    require_positive(r, "wheel_speed_limit", p.wheel_speed_limit, "limit");
    require_positive(r, "leg_torque_limit", p.leg_torque_limit, "limit");
    require_positive(r, "gear_ratio", p.gear_ratio, "ratio");
    require_positive(r, "gravity", p.gravity, "acceleration");
    require_ordered(r, "hip_range", p.hip_range);
    require_ordered(r, "knee_range", p.knee_range);

    if (p.hip_range.lo < deg2rad(-120.0) - 1e-12 || p.hip_range.hi > deg2rad(120.0) + 1e-12)
        r.warn("hip_range extends beyond [-120 deg, 120 deg]");
    if (p.knee_range.lo < deg2rad(-160.0) - 1e-12 || p.knee_range.hi > 1e-12)
        r.warn("knee_range extends beyond [-160 deg, 0 deg]");
    return r;
}

}  // namespace hopper
