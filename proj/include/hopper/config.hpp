#pragma once

#include "hopper/contact.hpp"
#include "hopper/control.hpp"
#include "hopper/model.hpp"
#include "hopper/terrain.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace hopper {

enum class GravityPreset { kMoon, kCustom };
enum class ContactMode { kCompliant, kRigidTouchdown };

// Base-velocity update: plain semi-implicit Euler, or the same step with the
// floating-base velocities recovered from the integrated centroidal momentum.
enum class Integrator { kMomentumConsistent, kSemiImplicit };

/// Everything one episode needs. Serialized as flat `key = value` text.
struct SimConfig {
    double dt = 0.001;
    double control_frequency = 1000.0;
    double episode_duration = 32.0;
    GravityPreset gravity_preset = GravityPreset::kMoon;
    TerrainSpec terrain = default_terrain_spec();
    double terrain_slice_y = 6.0;
    double start_x = 1.0;
    double stand_spread = 0.15;  // initial fore-aft foot offset from the hip, m
    PidGains controller_gains;
    double integral_limit = 0.5;  // rad s
    bool rw_enabled = true;
    std::uint64_t rng_seed = 1;
    ContactMode contact_mode = ContactMode::kCompliant;
    Integrator integrator = Integrator::kMomentumConsistent;
    RobotParams robot = default_robot_params();
    ContactParams contact;
    DesaturationParams desaturation;
    GaitParams gait = default_gait_params(default_robot_params());
    double compare_threshold = 50.0;  // percent

    /// Robot parameters with the gravity preset applied.
    RobotParams effective_robot() const;
    /// Simulation steps per control update.
    int control_period_steps() const;

    bool operator==(const SimConfig&) const = default;
};

class ConfigError : public Error {
public:
    ConfigError(const std::string& msg, int line = 0);
    int line() const { return line_; }

private:
    int line_;
};

std::string serialize_config(const SimConfig& config);
/// Parses over the defaults; unknown keys and malformed values raise
/// ConfigError carrying the 1-based line number. No semantic validation.
SimConfig parse_config(std::string_view text);
SimConfig read_config_file(const std::filesystem::path& path);

/// All semantic checks: robot parameters, terrain, contact, gait, timing and
/// the closed-loop stability gate on the PID gains.
ValidationReport validate_config(const SimConfig& config);

/// read_config_file + validate_config; throws ConfigError on any failure.
SimConfig load_config(const std::filesystem::path& path);

/// Applies one `key=value` override. Unknown keys raise ConfigError.
void apply_override(SimConfig& config, std::string_view assignment);

std::vector<std::string> config_keys();

/// Pitch inertia used by the stability gate (torso plus wheel).
double reduced_pitch_inertia(const RobotParams& params);

}  // namespace hopper
