#include "hopper/control.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

#include <Eigen/Geometry>

namespace hopper {

namespace {

constexpr std::array<std::string_view, 5> kPhaseNames{"Landing", "StanceStabilize", "CrouchLoad", "PushOff", "Flight"};

double clamp_abs(double v, double limit) { return std::clamp(v, -limit, limit); }

double smoothstep(double u)
{
    u = std::clamp(u, 0.0, 1.0);
    return u * u * (3.0 - 2.0 * u);
}

}  // namespace

std::string_view phase_name(HopperPhase phase) { return kPhaseNames[static_cast<int>(phase)]; }

std::optional<HopperPhase> parse_phase(std::string_view name)
{
    for (std::size_t i = 0; i < kPhaseNames.size(); ++i)
        if (kPhaseNames[i] == name) return static_cast<HopperPhase>(i);
    return std::nullopt;
}

HopperPhase next_phase(HopperPhase phase)
{
    switch (phase) {
    case HopperPhase::kLanding: return HopperPhase::kStanceStabilize;
    case HopperPhase::kStanceStabilize: return HopperPhase::kCrouchLoad;
    case HopperPhase::kCrouchLoad: return HopperPhase::kPushOff;
    case HopperPhase::kPushOff: return HopperPhase::kFlight;
    case HopperPhase::kFlight: return HopperPhase::kLanding;
    }
    return HopperPhase::kLanding;
}

PidOutput pid_attitude_torque(const ControllerState& cs, double theta, double theta_dot, double dt,
                              const PidGains& gains, double tau_max, double integral_limit)
{
    PidOutput out;
    out.state = cs;
    const double error = theta;
    const double candidate = clamp_abs(cs.integral_error + error * dt, integral_limit);
    const double raw = gains.kp * error + gains.kd * theta_dot + gains.ki * candidate;
    if (std::abs(raw) > tau_max) {
        out.torque = std::copysign(tau_max, raw);
        out.clamped = true;
    } else {
        out.torque = raw;
        out.state.integral_error = candidate;
    }
    out.state.previous_error = error;
    if (std::abs(out.torque) >= kSaturationFraction * tau_max) out.state.saturation_accumulator += dt;
    return out;
}

bool closed_loop_stable(const PidGains& g, double inertia)
{
    if (!(inertia > 0.0) || g.kp < 0.0 || g.kd < 0.0 || g.ki < 0.0) return false;
    if (g.ki == 0.0) return g.kd > 0.0 && g.kp > 0.0;
    return g.kd > 0.0 && g.kp > 0.0 && g.kd * g.kp > inertia * g.ki;
}

double limit_wheel_torque(double torque, double wheel_speed, const RobotParams& p)
{
    torque = clamp_abs(torque, p.wheel_torque_limit);
    if (std::abs(wheel_speed) >= p.wheel_speed_limit && torque * wheel_speed > 0.0) return 0.0;
    return torque;
}

double desaturation_torque(double wheel_speed, HopperPhase phase, const DesaturationParams& p)
{
    if (!is_stance(phase)) return 0.0;
    return clamp_abs(-p.gain * wheel_speed, p.torque_limit);
}

Vec2 leg_forward_kinematics(double hip, double knee, const RobotParams& p)
{
    const double a = hip;
    const double b = hip + knee;
    return {p.upper_leg_length * std::sin(a) + p.lower_leg_length * std::sin(b),
            -p.upper_leg_length * std::cos(a) - p.lower_leg_length * std::cos(b)};
}

LegIk leg_inverse_kinematics(const Vec2& foot, const RobotParams& p)
{
    const double l1 = p.upper_leg_length;
    const double l2 = p.lower_leg_length;
    LegIk ik;
    double reach = foot.norm();
    const double max_reach = l1 + l2;
    const double min_reach = std::abs(l1 - l2) + 1e-9;
    if (reach > max_reach) {
        reach = max_reach;
        ik.feasible = false;
    } else if (reach < min_reach) {
        reach = min_reach;
        ik.feasible = false;
    }
    const double c = std::clamp((reach * reach - l1 * l1 - l2 * l2) / (2.0 * l1 * l2), -1.0, 1.0);
    ik.knee = -std::acos(c);
    // Direction of the foot measured from the downward vertical, positive toward +x.
    const double direction = std::atan2(foot.x(), -foot.y());
    const double offset = std::atan2(l2 * std::sin(ik.knee), l1 + l2 * std::cos(ik.knee));
    ik.hip = direction - offset;
    return ik;
}

Vec4 posture_for_feet(const Vec2& left_foot, const Vec2& right_foot, const RobotParams& p, bool* feasible)
{
    const LegIk l = leg_inverse_kinematics(left_foot, p);
    const LegIk r = leg_inverse_kinematics(right_foot, p);
    if (feasible) *feasible = l.feasible && r.feasible;
    return {l.hip, l.knee, r.hip, r.knee};
}

GaitParams default_gait_params(const RobotParams& p)
{
    GaitParams g;
    // Landing posture: feet ahead of the hip and spread fore-aft.
    const double forward = 0.10;
    const double spread = 0.20;
    const double height = 0.85;
    g.flight_posture = posture_for_feet(Vec2(forward + spread, -height), Vec2(forward - spread, -height), p);
    return g;
}

ValidationReport validate_gait_params(const GaitParams& g, const RobotParams& p)
{
    ValidationReport r;
    if (!(g.crouch_duration > 0.0)) r.fail("crouch_duration must be positive");
    if (!(g.pushoff_duration > 0.0)) r.fail("pushoff_duration must be positive");
    if (!(g.flight_blend >= 0.0)) r.fail("flight_blend must be non-negative");
    if (!(g.landing_dwell > 0.0)) r.fail("landing_dwell must be positive");
    if (!(g.stance_watchdog > 0.0)) r.fail("stance_watchdog must be positive");
    if (!(g.pushoff_knee_rate > 0.0)) r.fail("pushoff_knee_rate must be positive");
    if (!(g.crouch_depth >= 0.0) || !(g.crouch_depth < p.leg_reach())) r.fail("crouch_depth must lie in [0, leg length)");
    if (!(g.stance_settle_threshold > 0.0)) r.fail("stance_settle_threshold must be positive");
    if (!(g.stance_min_duration >= 0.0)) r.fail("stance_min_duration must be non-negative");
    if (!p.knee_range.contains(g.pushoff_final_knee)) r.fail("pushoff_final_knee outside knee range");
    if (!(std::abs(g.pushoff_angle) < kPi / 2.0)) r.fail("pushoff_angle must lie within +-90 deg");
    for (const LegPdGains* lg : {&g.landing_gains, &g.stance_gains, &g.flight_gains, &g.pushoff_gains})
        if (!(lg->kp >= 0.0) || !(lg->kd >= 0.0)) r.fail("leg PD gains must be non-negative");
    const StanceForceGains& sg = g.support;
    if (!(sg.stiffness >= 0.0 && sg.damping >= 0.0 && sg.pitch_kp >= 0.0 && sg.pitch_kd >= 0.0))
        r.fail("support gains must be non-negative");
    for (int j = 0; j < 4; ++j)
        if (!p.range_of(j).contains(g.flight_posture[j])) r.fail("flight posture outside joint range");
    return r;
}

namespace {

double virtual_knee_for_length(double length, const RobotParams& p)
{
    const double l1 = p.upper_leg_length;
    const double l2 = p.lower_leg_length;
    const double c = std::clamp((length * length - l1 * l1 - l2 * l2) / (2.0 * l1 * l2), -1.0, 1.0);
    return -std::acos(c);
}

double virtual_length_for_knee(double knee, const RobotParams& p)
{
    const double l1 = p.upper_leg_length;
    const double l2 = p.lower_leg_length;
    return std::sqrt(l1 * l1 + l2 * l2 + 2.0 * l1 * l2 * std::cos(knee));
}

JointTargets clamp_to_ranges(Vec4 q, bool clamped, const RobotParams& p)
{
    JointTargets t;
    for (int j = 0; j < 4; ++j) {
        const double c = p.range_of(j).clamp(q[j]);
        clamped = clamped || c != q[j];
        q[j] = c;
    }
    t.q = q;
    t.clamped = clamped;
    return t;
}

}  // namespace

StanceAnchor capture_stance_anchor(const GenState& g, const RobotParams& p)
{
    StanceAnchor a;
    a.joints = g.joints();
    const FootPair feet = foot_states(g.q, g.qdot, p);
    a.feet = {feet[0].position, feet[1].position};
    a.hip = Vec2(g.q[idx::kX], g.q[idx::kZ]);
    a.pitch = g.pitch();
    return a;
}

namespace {

// The feet are placed in the measured torso frame; `pitch` is only the reference
// handed to the torso loop.
JointTargets posture_from_hip(const std::array<Vec2, 2>& feet, const Vec2& hip, double pitch, double measured,
                              const RobotParams& p)
{
    const Eigen::Rotation2Dd to_torso(-measured);
    bool feasible = true;
    const Vec4 q = posture_for_feet(to_torso * (feet[0] - hip), to_torso * (feet[1] - hip), p, &feasible);
    JointTargets t = clamp_to_ranges(q, !feasible, p);
    t.pitch = pitch;
    return t;
}

JointTargets hold(const StanceAnchor& anchor, const RobotParams& p)
{
    JointTargets t = clamp_to_ranges(anchor.joints, false, p);
    t.pitch = anchor.pitch;
    return t;
}

}  // namespace

namespace {

StanceReference reference_at(HopperPhase phase, double t, const GaitParams& g, const StanceAnchor& anchor,
                             const TerrainProfile& terrain, const RobotParams& p)
{
    StanceReference r;
    r.feet = anchor.feet;
    r.hip = anchor.hip;
    r.pitch = anchor.pitch;
    t = std::max(0.0, t);
    switch (phase) {
    case HopperPhase::kLanding:
    case HopperPhase::kFlight:
        return r;
    case HopperPhase::kStanceStabilize:
    case HopperPhase::kCrouchLoad:
    case HopperPhase::kPushOff:
        break;
    }

    for (Vec2& f : r.feet) f.y() = terrain.height(f.x()) + p.foot_radius;
    const Vec2 centroid = 0.5 * (r.feet[0] + r.feet[1]);
    const Vec2 stand(centroid.x() + g.stand_offset, centroid.y() + g.stand_height);
    if (phase == HopperPhase::kStanceStabilize) {
        r.hold = t <= 0.0;
        const double s = g.stance_min_duration > 0.0 ? smoothstep(t / g.stance_min_duration) : 1.0;
        // Height blend slow enough that its peak acceleration stays under g/2.
        const double rise = stand.y() - anchor.hip.y();
        const double blend = std::max(g.stance_min_duration, std::sqrt(12.0 * std::abs(rise) / p.gravity));
        r.hip = Vec2(stand.x(), anchor.hip.y() + (blend > 0.0 ? smoothstep(t / blend) : 1.0) * rise);
        r.pitch = (1.0 - s) * anchor.pitch;
        return r;
    }

    r.pitch = 0.0;
    const Vec2 crouched = stand + Vec2(g.crouch_lean, -g.crouch_depth);
    if (phase == HopperPhase::kCrouchLoad) {
        r.hold = t <= 0.0;
        r.hip = anchor.hip + smoothstep(t / g.crouch_duration) * (crouched - anchor.hip);
        return r;
    }

    // PushOff: the virtual leg from the foot centroid to the hip lengthens as
    // its knee opens; the hip travels along the tilted thrust direction.
    const double length0 = (crouched - centroid).norm();
    const Vec2 thrust(std::sin(g.pushoff_angle), std::cos(g.pushoff_angle));
    const double knee0 = virtual_knee_for_length(length0, p);
    const double ramp = g.pushoff_duration;
    const double swept = t < ramp ? g.pushoff_knee_rate * t * t / (2.0 * ramp)
                                  : g.pushoff_knee_rate * (ramp / 2.0 + (t - ramp));
    const double knee = std::min(knee0 + swept, std::max(g.pushoff_final_knee, knee0));
    r.hip = crouched + (virtual_length_for_knee(knee, p) - length0) * thrust;
    return r;
}

}  // namespace

StanceReference stance_reference(HopperPhase phase, double time_in_phase, const GaitParams& g,
                                 const StanceAnchor& anchor, const TerrainProfile& terrain, const RobotParams& p)
{
    StanceReference r = reference_at(phase, time_in_phase, g, anchor, terrain, p);
    constexpr double h = 1e-4;
    const double t0 = std::max(0.0, time_in_phase - h);
    const double t1 = std::max(0.0, time_in_phase) + h;
    r.hip_velocity = (reference_at(phase, t1, g, anchor, terrain, p).hip -
                      reference_at(phase, t0, g, anchor, terrain, p).hip) / (t1 - t0);
    return r;
}

JointTargets stance_joint_targets(HopperPhase phase, double time_in_phase, const GaitParams& g,
                                  const StanceAnchor& anchor, const TerrainProfile& terrain, const RobotParams& p,
                                  double measured)
{
    const StanceReference r = reference_at(phase, time_in_phase, g, anchor, terrain, p);
    if (phase == HopperPhase::kLanding || phase == HopperPhase::kFlight || r.hold) return hold(anchor, p);
    // Push-off is too brisk for the support loop, so its posture also fixes the pitch.
    return posture_from_hip(r.feet, r.hip, r.pitch, phase == HopperPhase::kPushOff ? r.pitch : measured, p);
}

Vec4 flight_joint_targets(double time_in_phase, const GaitParams& g, const Vec4& liftoff)
{
    const double s = g.flight_blend > 0.0 ? smoothstep(time_in_phase / g.flight_blend) : 1.0;
    return liftoff + s * (g.flight_posture - liftoff);
}

Vec4 stance_force_torques(const GenState& state, const FootPair& feet, const std::array<double, 2>& normal_force,
                          const StanceReference& ref, const StanceForceGains& gains, bool track_hip, double friction,
                          const RobotParams& p, const Vec4& posture)
{
    Vec4 tau = posture;
    std::vector<int> legs;
    for (int i = 0; i < 2; ++i)
        if (normal_force[i] > 0.0) legs.push_back(i);
    if (legs.empty()) return tau;

    const double m = p.total_mass();
    const Vec2 hip(state.q[idx::kX], state.q[idx::kZ]);
    Vec2 force(0.0, m * p.gravity);
    if (track_hip) {
        const Vec2 hip_velocity(state.qdot[idx::kX], state.qdot[idx::kZ]);
        force += m * (gains.stiffness * (ref.hip - hip) + gains.damping * (ref.hip_velocity - hip_velocity));
        force.y() = std::clamp(force.y(), 0.0, 2.0 * m * p.gravity);
    }

    // The hips sit at the torso centre of mass, so the torso pitches only
    // through the hip torques, i.e. the moment of the foot forces about the hip.
    const double hip_sum = gains.pitch_kp * (state.pitch() - ref.pitch) + gains.pitch_kd * state.pitch_rate();
    const double moment = -hip_sum;

    std::array<Vec2, 2> ground{Vec2::Zero(), Vec2::Zero()};
    if (legs.size() == 1) {
        // One contact: the pitch moment fixes the horizontal force.
        const int leg = legs[0];
        const Vec2 r = feet[leg].position - hip;
        ground[leg] = Vec2(0.0, force.y());
        if (r.y() < -1e-6) ground[leg].x() = (r.x() * force.y() - moment) / r.y();
    } else {
        // Two contacts share the horizontal force evenly; the vertical split
        // balances the pitch moment, and the horizontal force is reduced until
        // both feet keep kMinShare of the load.
        constexpr double kMinShare = 0.1;
        const Vec2 r0 = feet[0].position - hip;
        const Vec2 r1 = feet[1].position - hip;
        const double span = r0.x() - r1.x();
        const double depth = 0.5 * (r0.y() + r1.y());
        const double lo = kMinShare * force.y();
        const double hi = (1.0 - kMinShare) * force.y();
        double fz0 = 0.5 * force.y();
        double fx = force.x();
        if (std::abs(span) > 1e-6) {
            // fz0 * span = moment + fx * depth - r1.x * Fz
            const auto split = [&](double h) { return (moment + h * depth - r1.x() * force.y()) / span; };
            if (std::abs(depth) > 1e-6) {
                const double a = (lo * span - moment + r1.x() * force.y()) / depth;
                const double b = (hi * span - moment + r1.x() * force.y()) / depth;
                fx = std::clamp(fx, std::min(a, b), std::max(a, b));
            }
            fz0 = std::clamp(split(fx), lo, hi);
        }
        ground[0] = Vec2(0.5 * fx, fz0);
        ground[1] = Vec2(0.5 * fx, force.y() - fz0);
    }
    for (int leg : legs) {
        Vec2 g = ground[leg];
        g.y() = std::max(0.0, g.y());
        g.x() = clamp_abs(g.x(), friction * std::max(g.y(), normal_force[leg]));
        const Mat28& jac = feet[leg].jacobian;
        tau[2 * leg] -= jac.col(idx::hip(leg)).dot(g);
        tau[2 * leg + 1] -= jac.col(idx::knee(leg)).dot(g);
    }

    // Posture terms and the friction clip disturb the hip sum; restore it.
    const double correction = (hip_sum - tau[0] - tau[2]) / static_cast<double>(legs.size());
    for (int leg : legs) tau[2 * leg] += correction;
    return tau;
}

Vec4 joint_pd_torques(const Vec4& setpoints, const Vec4& q, const Vec4& qdot, const LegPdGains& gains,
                      double torque_limit)
{
    Vec4 tau;
    for (int j = 0; j < 4; ++j)
        tau[j] = clamp_abs(gains.kp * (setpoints[j] - q[j]) - gains.kd * qdot[j], torque_limit);
    return tau;
}

PhaseDecision phase_transition(HopperPhase phase, double time_in_phase, const ContactState& contact,
                               const GenState& state, const GaitParams& g)
{
    PhaseDecision d;
    d.phase = phase;
    const bool loaded = !airborne(contact);
    switch (phase) {
    case HopperPhase::kFlight:
        if (loaded) d.phase = HopperPhase::kLanding;
        break;
    case HopperPhase::kLanding:
        if (time_in_phase >= g.landing_dwell) d.phase = HopperPhase::kStanceStabilize;
        break;
    case HopperPhase::kStanceStabilize:
        if (time_in_phase >= g.stance_min_duration && std::abs(state.pitch_rate()) < g.stance_settle_threshold)
            d.phase = HopperPhase::kCrouchLoad;
        break;
    case HopperPhase::kCrouchLoad:
        if (time_in_phase >= g.crouch_duration) d.phase = HopperPhase::kPushOff;
        break;
    case HopperPhase::kPushOff:
        if (!loaded) d.phase = HopperPhase::kFlight;
        break;
    }
    d.changed = d.phase != phase;
    if (!d.changed && is_stance(phase) && time_in_phase > g.stance_watchdog) d.watchdog = true;
    return d;
}

}  // namespace hopper
