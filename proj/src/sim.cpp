#include "hopper/sim.hpp"

#include "hopper/io.hpp"

#include <Eigen/LU>

#include <cmath>
#include <cstdio>
#include <sstream>

namespace hopper {

World make_world(const SimConfig& config)
{
    const ValidationReport report = validate_config(config);
    if (!report.passed()) throw ConfigError(report.to_string());
    World w;
    w.config = config;
    w.robot = config.effective_robot();
    TerrainSpec spec = config.terrain;
    spec.rng_seed = config.rng_seed;
    w.heightfield = generate_heightfield(spec);
    w.terrain = profile_slice(w.heightfield, config.terrain_slice_y);
    return w;
}

namespace {

constexpr double kKneePreload = 0.02;  // m of leg compression at rest

}  // namespace

SimState initial_state(const World& world)
{
    const SimConfig& cfg = world.config;
    const RobotParams& p = world.robot;
    const double spread = cfg.stand_spread;
    const double r = p.foot_radius;
    // Static sink of the compliant ground with the weight shared by both feet.
    const double sink = p.total_mass() * p.gravity / (2.0 * cfg.contact.stiffness);

    const double x0 = cfg.start_x;
    const double ground_front = world.terrain.height(x0 + spread);
    const double ground_back = world.terrain.height(x0 - spread);
    const double leg_height = std::sqrt(p.leg_reach() * p.leg_reach() - spread * spread) - kKneePreload;
    const double z0 = std::max(ground_front, ground_back) + r - sink + leg_height;

    // Feet rest on the surface; each leg absorbs its own ground height.
    const Vec2 front(spread, -(z0 - (ground_front + r - sink)));
    const Vec2 back(-spread, -(z0 - (ground_back + r - sink)));
    const Vec4 posture = posture_for_feet(front, back, p);

    SimState s;
    s.gen.q[idx::kX] = x0;
    s.gen.q[idx::kZ] = z0;
    s.gen.q.tail<4>() = posture;
    s.phase = HopperPhase::kStanceStabilize;
    s.anchor = capture_stance_anchor(s.gen, p);
    s.contact = evaluate_contacts(foot_states(s.gen.q, s.gen.qdot, p), world.terrain, p, cfg.contact);
    return s;
}

namespace {

Vec5 control_torques(SimState& s, const World& world)
{
    const SimConfig& cfg = world.config;
    const RobotParams& p = world.robot;
    const double period = cfg.control_period_steps() * cfg.dt;
    Vec5 tau = Vec5::Zero();

    if (cfg.rw_enabled) {
        double tau_w = 0.0;
        if (s.phase == HopperPhase::kFlight) {
            const PidOutput out = pid_attitude_torque(s.controller, s.gen.pitch(), s.gen.pitch_rate(), period,
                                                      cfg.controller_gains, p.wheel_torque_limit, cfg.integral_limit);
            s.controller = out.state;
            tau_w = out.torque;
        } else {
            tau_w = desaturation_torque(s.gen.wheel_speed(), s.phase, cfg.desaturation);
        }
        tau[act::kWheel] = limit_wheel_torque(tau_w, s.gen.wheel_speed(), p);
    }
    s.controller.wheel_speed = s.gen.wheel_speed();

    const GaitParams& g = cfg.gait;
    Vec4 setpoints;
    LegPdGains gains;
    switch (s.phase) {
    case HopperPhase::kFlight:
        setpoints = flight_joint_targets(s.time_in_phase, g, s.anchor.joints);
        gains = g.flight_gains;
        break;
    default:
        setpoints = stance_joint_targets(s.phase, s.time_in_phase, g, s.anchor, world.terrain, p, s.gen.pitch()).q;
        gains = s.phase == HopperPhase::kLanding   ? g.landing_gains
                : s.phase == HopperPhase::kPushOff ? g.pushoff_gains
                                                   : g.stance_gains;
        break;
    }
    Vec4 legs = joint_pd_torques(setpoints, s.gen.joints(), s.gen.joint_rates(), gains, 1e300);
    if (s.phase != HopperPhase::kFlight && s.phase != HopperPhase::kLanding) {
        const StanceReference ref = stance_reference(s.phase, s.time_in_phase, g, s.anchor, world.terrain, p);
        const std::array<double, 2> normal{s.contact[0].normal_force, s.contact[1].normal_force};
        legs = stance_force_torques(s.gen, foot_states(s.gen.q, s.gen.qdot, p), normal, ref, g.support,
                                    s.phase != HopperPhase::kPushOff, 0.8 * cfg.contact.friction, p, legs);
    }
    for (int j = 0; j < 4; ++j) legs[j] = std::clamp(legs[j], -p.leg_torque_limit, p.leg_torque_limit);
    tau.tail<4>() = legs;
    return tau;
}

// Net force and moment about the system CoM from the contact forces, applied
// at the foot centres, plus gravity.
Eigen::Vector3d external_wrench(const Vec8& q, const ContactState& contact, const RobotParams& p)
{
    const FootPair feet = foot_states(q, Vec8::Zero(), p);
    const Vec2 com = com_position(q, p);
    Eigen::Vector3d w(0.0, -p.total_mass() * p.gravity, 0.0);
    for (int i = 0; i < 2; ++i) {
        w[0] += contact[i].force.x();
        w[1] += contact[i].force.y();
        w[2] += cross2(feet[i].position - com, contact[i].force);
    }
    return w;
}

void clamp_joints(Vec8& q, Vec8& qdot, const RobotParams& p)
{
    for (int j = idx::kHipL; j < idx::kDof; ++j) {
        const JointRange range = p.range_of(j);
        if (q[j] < range.lo) {
            q[j] = range.lo;
            if (qdot[j] < 0.0) qdot[j] = 0.0;
        } else if (q[j] > range.hi) {
            q[j] = range.hi;
            if (qdot[j] > 0.0) qdot[j] = 0.0;
        }
    }
}

// Symplectic Euler in which the floating-base velocities are recovered from
// the centroidal momentum advanced by the external wrench. Joint and wheel
// coordinates follow plain semi-implicit Euler.
void integrate_momentum_consistent(GenState& g, const Vec8& qddot, const ContactState& contact, const RobotParams& p,
                                   double dt)
{
    const Eigen::Vector3d h0 = centroidal_matrix(g.q, p) * g.qdot;
    const Eigen::Vector3d h1 = h0 + dt * external_wrench(g.q, contact, p);

    Vec8 qdot = g.qdot + dt * qddot;
    Vec8 q = g.q + dt * qdot;
    clamp_joints(q, qdot, p);
    const Vec8 q_start = g.q;

    Eigen::Vector3d vb = qdot.head<3>();
    for (int it = 0; it < 20; ++it) {
        const Mat38 a = centroidal_matrix(q, p);
        const Eigen::Vector3d rhs = h1 - a.rightCols<5>() * qdot.tail<5>();
        const Eigen::Vector3d next = a.leftCols<3>().partialPivLu().solve(rhs);
        const double change = (next - vb).cwiseAbs().maxCoeff();
        vb = next;
        qdot.head<3>() = vb;
        q.head<3>() = q_start.head<3>() + dt * vb;
        if (change <= 1e-15 * (1.0 + vb.cwiseAbs().maxCoeff())) break;
    }
    g.q = q;
    g.qdot = qdot;
}

void integrate_semi_implicit(GenState& g, const Vec8& qddot, const RobotParams& p, double dt)
{
    g.qdot += dt * qddot;
    g.q += dt * g.qdot;
    clamp_joints(g.q, g.qdot, p);
}

ContactState touchdown_impact(GenState& g, const ContactState& contact, const World& world)
{
    const RobotParams& p = world.robot;
    FootPair feet = foot_states(g.q, g.qdot, p);
    ConstraintRows rows(0, 8);
    for (int i = 0; i < 2; ++i) {
        if (!contact[i].in_contact) continue;
        // Only approaching feet are stopped.
        if (contact[i].normal.dot(feet[i].velocity) >= 0.0) continue;
        rows.conservativeResize(rows.rows() + 1, Eigen::NoChange);
        rows.row(rows.rows() - 1) = contact[i].normal.transpose() * feet[i].jacobian;
    }
    if (rows.rows() == 0) return contact;
    std::array<bool, 8> held{};
    held[idx::kWheel] = true;
    const ImpactResult r = impact_map(g.qdot, rows, mass_matrix(g.q, p), held);
    if (r.singular) return contact;
    g.qdot = r.qdot;
    feet = foot_states(g.q, g.qdot, p);
    return evaluate_contacts(feet, world.terrain, p, world.config.contact);
}

}  // namespace

SimState step(const SimState& state, const World& world)
{
    const SimConfig& cfg = world.config;
    const RobotParams& p = world.robot;
    const double dt = cfg.dt;
    SimState s = state;

    if (s.step_index % cfg.control_period_steps() == 0) s.applied_torques = control_torques(s, world);

    const ForcePair forces = contact_forces(s.contact);
    // Contact damping and friction act on the light feet; their velocity
    // dependence is integrated implicitly so the step stays stable.
    const FootPair feet = foot_states(s.gen.q, s.gen.qdot, p);
    ForwardDynamicsOptions opts;
    opts.implicit_dt = dt;
    std::array<Mat2, 2> damping;
    for (int i = 0; i < 2; ++i) {
        damping[i] = contact_damping(s.contact[i], feet[i].velocity, cfg.contact);
        opts.implicit_damping += feet[i].jacobian.transpose() * damping[i] * feet[i].jacobian;
    }
    ForwardDynamicsResult fd;
    try {
        fd = forward_dynamics(s.gen.q, s.gen.qdot, s.applied_torques, forces, p, opts);
    } catch (const Error& e) {
        throw SimulationError(e.what(), dump_state(state));
    }
    s.wheel_motor_torque = fd.wheel_motor_torque;

    // Contact forces as realized over the step, for the momentum update.
    ContactState applied = s.contact;
    for (int i = 0; i < 2; ++i) {
        applied[i].force -= dt * damping[i] * (feet[i].jacobian * fd.qddot);
    }

    const Vec8 q_before = s.gen.q;
    if (cfg.integrator == Integrator::kMomentumConsistent)
        integrate_momentum_consistent(s.gen, fd.qddot, applied, p, dt);
    else
        integrate_semi_implicit(s.gen, fd.qddot, p, dt);

    if (!s.gen.finite()) throw SimulationError("non-finite state at t = " + io::format_double(state.t), dump_state(state));

    // Work done by the motors over the step's displacement.
    const Vec8 dq = s.gen.q - q_before;
    double work = fd.wheel_motor_torque * dq[idx::kWheel];
    for (int j = 0; j < 4; ++j) work += s.applied_torques[1 + j] * dq[idx::kHipL + j];
    s.actuator_work += work;

    s.step_index += 1;
    s.t = static_cast<double>(s.step_index) * dt;
    s.time_in_phase += dt;

    s.contact = evaluate_contacts(foot_states(s.gen.q, s.gen.qdot, p), world.terrain, p, cfg.contact);
    if (cfg.contact_mode == ContactMode::kRigidTouchdown && s.phase == HopperPhase::kFlight &&
        (s.contact[0].in_contact || s.contact[1].in_contact))
        s.contact = touchdown_impact(s.gen, s.contact, world);

    const PhaseDecision d = phase_transition(s.phase, s.time_in_phase, s.contact, s.gen, cfg.gait);
    if (d.watchdog) s.termination = std::string("stance watchdog expired in ") + std::string(phase_name(s.phase));
    if (d.changed) {
        s.phase = d.phase;
        s.time_in_phase = 0.0;
        switch (d.phase) {
        case HopperPhase::kLanding:
        case HopperPhase::kStanceStabilize:
        case HopperPhase::kCrouchLoad:
            s.anchor = capture_stance_anchor(s.gen, p);
            break;
        case HopperPhase::kFlight:
            s.anchor = capture_stance_anchor(s.gen, p);
            s.controller.integral_error = 0.0;
            s.controller.previous_error = 0.0;
            s.controller.saturation_accumulator = 0.0;
            break;
        default:
            break;
        }
    }

    const double clearance = s.gen.q[idx::kZ] - world.terrain.height(s.gen.q[idx::kX]);
    if (!s.termination && clearance < kTorsoClearance) s.termination = "torso struck the ground";
    return s;
}

LogRecord make_record(const SimState& s, const World& world)
{
    const RobotParams& p = world.robot;
    LogRecord r;
    r.t = s.t;
    r.phase = s.phase;
    r.q = s.gen.q;
    r.qdot = s.gen.qdot;
    r.tau = s.applied_torques;
    r.wheel_motor_torque = s.wheel_motor_torque;
    for (int i = 0; i < 2; ++i) {
        r.normal_force[i] = s.contact[i].normal_force;
        r.tangential_force[i] = s.contact[i].tangential_force;
    }
    const Energy e = mechanical_energy(s.gen.q, s.gen.qdot, p);
    r.kinetic = e.kinetic;
    r.potential = e.potential;
    r.actuator_work = s.actuator_work;
    r.saturation_time = s.controller.saturation_accumulator;
    r.com = com_position(s.gen.q, p);
    r.com_velocity = com_velocity(s.gen.q, s.gen.qdot, p);
    r.momentum = total_pitch_momentum(s.gen.q, s.gen.qdot, p);
    return r;
}

TrajectoryLog run_episode(const SimConfig& config)
{
    const World world = make_world(config);
    TrajectoryLog log;
    log.meta.config_text = serialize_config(config);
    char hash[17];
    std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(io::fnv1a64(log.meta.config_text)));
    log.meta.config_hash = hash;
    log.meta.seed = config.rng_seed;
    log.meta.dt = config.dt;

    SimState s = initial_state(world);
    log.records.push_back(make_record(s, world));
    const long steps = std::lround(config.episode_duration / config.dt);
    log.records.reserve(static_cast<std::size_t>(steps) + 1);
    for (long k = 0; k < steps; ++k) {
        try {
            s = step(s, world);
        } catch (const SimulationError& e) {
            log.meta.aborted = true;
            log.meta.abort_reason = e.what();
            log.meta.last_good_state = e.state_dump();
            break;
        }
        log.records.push_back(make_record(s, world));
        if (s.termination) {
            log.meta.aborted = true;
            log.meta.abort_reason = *s.termination;
            log.meta.last_good_state = dump_state(s);
            break;
        }
    }
    return log;
}

namespace {

constexpr const char* kCoordNames[8] = {"x", "z", "theta", "phi_w", "hip_l", "knee_l", "hip_r", "knee_r"};

}  // namespace

std::string trajectory_csv_header()
{
    std::string h = "t,phase";
    for (const char* n : kCoordNames) h += std::string(",") + n;
    for (const char* n : kCoordNames) h += std::string(",d") + n;
    h += ",tau_w,tau_hip_l,tau_knee_l,tau_hip_r,tau_knee_r,wheel_motor_torque";
    h += ",fn_l,fn_r,ft_l,ft_r,omega_w,kinetic,potential,energy,actuator_work,saturation_time";
    h += ",com_x,com_z,com_vx,com_vz,momentum";
    return h;
}

std::string trajectory_csv(const TrajectoryLog& log)
{
    std::string out = trajectory_csv_header() + "\n";
    out.reserve(log.records.size() * 640);
    auto put = [&out](double v) {
        out += ',';
        out += io::format_double(v);
    };
    for (const LogRecord& r : log.records) {
        out += io::format_double(r.t);
        out += ',';
        out += phase_name(r.phase);
        for (int i = 0; i < 8; ++i) put(r.q[i]);
        for (int i = 0; i < 8; ++i) put(r.qdot[i]);
        for (int i = 0; i < 5; ++i) put(r.tau[i]);
        put(r.wheel_motor_torque);
        put(r.normal_force[0]);
        put(r.normal_force[1]);
        put(r.tangential_force[0]);
        put(r.tangential_force[1]);
        put(r.wheel_speed());
        put(r.kinetic);
        put(r.potential);
        put(r.kinetic + r.potential);
        put(r.actuator_work);
        put(r.saturation_time);
        put(r.com.x());
        put(r.com.y());
        put(r.com_velocity.x());
        put(r.com_velocity.y());
        put(r.momentum);
        out += '\n';
    }
    return out;
}

std::string metadata_text(const TrajectoryLog& log)
{
    std::ostringstream os;
    os << "config_hash = " << log.meta.config_hash << "\n";
    os << "seed = " << log.meta.seed << "\n";
    os << "dt = " << io::format_double(log.meta.dt) << "\n";
    os << "records = " << log.records.size() << "\n";
    os << "aborted = " << (log.meta.aborted ? "true" : "false") << "\n";
    if (log.meta.aborted) {
        os << "abort_reason = " << log.meta.abort_reason << "\n";
        std::istringstream dump(log.meta.last_good_state);
        for (std::string line; std::getline(dump, line);) os << "last_good." << line << "\n";
    }
    return os.str();
}

std::string dump_state(const SimState& s)
{
    std::ostringstream os;
    os << "t = " << io::format_double(s.t) << "\n";
    os << "phase = " << phase_name(s.phase) << "\n";
    auto vec = [&os](const char* name, const auto& v) {
        os << name << " =";
        for (int i = 0; i < v.size(); ++i) os << ' ' << io::format_double(v[i]);
        os << "\n";
    };
    vec("q", s.gen.q);
    vec("qdot", s.gen.qdot);
    vec("tau", s.applied_torques);
    return os.str();
}

}  // namespace hopper
