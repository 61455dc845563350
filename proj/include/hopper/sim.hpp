#pragma once

#include "hopper/config.hpp"
#include "hopper/contact.hpp"
#include "hopper/control.hpp"
#include "hopper/dynamics.hpp"
#include "hopper/terrain.hpp"

#include <optional>
#include <string>
#include <vector>

namespace hopper {

class SimulationError : public Error {
public:
    SimulationError(const std::string& what, std::string state_dump)
        : Error(what), state_dump_(std::move(state_dump))
    {
    }
    const std::string& state_dump() const { return state_dump_; }

private:
    std::string state_dump_;
};

struct SimState {
    double t = 0.0;
    long step_index = 0;
    GenState gen;
    HopperPhase phase = HopperPhase::kStanceStabilize;
    double time_in_phase = 0.0;
    ControllerState controller;
    ContactState contact;           // evaluated at `gen`
    Vec5 applied_torques = Vec5::Zero();  // [tau_w, hip_L, knee_L, hip_R, knee_R]
    double wheel_motor_torque = 0.0;
    StanceAnchor anchor;            // captured on entry to the stance segment
    double actuator_work = 0.0;     // J, cumulative
    std::optional<std::string> termination;  // set when the episode must end
};

/// Immutable per-episode context.
struct World {
    SimConfig config;
    RobotParams robot;
    Heightfield heightfield;
    TerrainProfile terrain;
};

World make_world(const SimConfig& config);

SimState initial_state(const World& world);

/// Advances one fixed step: control update at control-rate boundaries,
/// forward dynamics under the current contact forces, semi-implicit Euler
/// update, touchdown impact map in rigid-touchdown mode, and the gait phase
/// transition. Throws SimulationError on non-finite state or a failed solve.
SimState step(const SimState& state, const World& world);

struct LogRecord {
    double t = 0.0;
    HopperPhase phase = HopperPhase::kStanceStabilize;
    Vec8 q = Vec8::Zero();
    Vec8 qdot = Vec8::Zero();
    Vec5 tau = Vec5::Zero();
    double wheel_motor_torque = 0.0;
    Vec2 normal_force = Vec2::Zero();      // left, right
    Vec2 tangential_force = Vec2::Zero();
    double kinetic = 0.0;
    double potential = 0.0;
    double actuator_work = 0.0;
    double saturation_time = 0.0;
    Vec2 com = Vec2::Zero();
    Vec2 com_velocity = Vec2::Zero();
    double momentum = 0.0;  // angular momentum about the CoM

    double pitch() const { return q[idx::kPitch]; }
    double pitch_rate() const { return qdot[idx::kPitch]; }
    double wheel_speed() const { return qdot[idx::kWheel]; }
};

struct EpisodeMetadata {
    std::string config_text;
    std::string config_hash;
    std::uint64_t seed = 0;
    double dt = 0.0;
    bool aborted = false;
    std::string abort_reason;
    std::string last_good_state;
};

struct TrajectoryLog {
    std::vector<LogRecord> records;
    EpisodeMetadata meta;
};

LogRecord make_record(const SimState& state, const World& world);

TrajectoryLog run_episode(const SimConfig& config);

/// One row per step, comma-separated, LF line endings, header first.
std::string trajectory_csv(const TrajectoryLog& log);
std::string trajectory_csv_header();
/// key = value sidecar describing the episode.
std::string metadata_text(const TrajectoryLog& log);

std::string dump_state(const SimState& state);

/// Torso centre closer than this to the terrain ends the episode.
constexpr double kTorsoClearance = 0.10;

}  // namespace hopper
