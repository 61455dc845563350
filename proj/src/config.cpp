#include "hopper/config.hpp"

#include "hopper/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

namespace hopper {

ConfigError::ConfigError(const std::string& msg, int line)
    : Error(line > 0 ? "line " + std::to_string(line) + ": " + msg : msg), line_(line)
{
}

RobotParams SimConfig::effective_robot() const
{
    RobotParams r = robot;
    if (gravity_preset == GravityPreset::kMoon) r.gravity = kMoonGravity;
    return r;
}

int SimConfig::control_period_steps() const
{
    const double steps = 1.0 / (control_frequency * dt);
    return std::max(1, static_cast<int>(std::lround(steps)));
}

double reduced_pitch_inertia(const RobotParams& p) { return p.torso_inertia + p.wheel_inertia; }

namespace {

std::string_view trim(std::string_view s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string_view> split_ws(std::string_view s)
{
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
        std::size_t j = i;
        while (j < s.size() && s[j] != ' ' && s[j] != '\t') ++j;
        if (j > i) out.push_back(s.substr(i, j - i));
        i = j;
    }
    return out;
}

double to_double(std::string_view s)
{
    s = trim(s);
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) throw ConfigError("expected a number, got '" + std::string(s) + "'");
    return v;
}

std::uint64_t to_u64(std::string_view s)
{
    s = trim(s);
    std::uint64_t v = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
        throw ConfigError("expected a non-negative integer, got '" + std::string(s) + "'");
    return v;
}

int to_int(std::string_view s)
{
    s = trim(s);
    int v = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) throw ConfigError("expected an integer, got '" + std::string(s) + "'");
    return v;
}

bool to_bool(std::string_view s)
{
    s = trim(s);
    if (s == "true" || s == "1") return true;
    if (s == "false" || s == "0") return false;
    throw ConfigError("expected true or false, got '" + std::string(s) + "'");
}

std::vector<double> to_doubles(std::string_view s, std::size_t n)
{
    const auto parts = split_ws(s);
    if (parts.size() != n)
        throw ConfigError("expected " + std::to_string(n) + " numbers, got '" + std::string(trim(s)) + "'");
    std::vector<double> out;
    for (auto p : parts) out.push_back(to_double(p));
    return out;
}

std::string fmt(double v) { return io::format_double(v); }

std::string fmt_range(const JointRange& r) { return fmt(r.lo) + " " + fmt(r.hi); }

JointRange to_range(std::string_view s)
{
    const auto v = to_doubles(s, 2);
    return {v[0], v[1]};
}

std::string fmt_craters(const std::vector<Crater>& craters)
{
    std::string out;
    for (std::size_t i = 0; i < craters.size(); ++i) {
        const Crater& c = craters[i];
        if (i) out += "; ";
        out += fmt(c.center.x()) + " " + fmt(c.center.y()) + " " + fmt(c.radius) + " " + fmt(c.depth) + " " +
               fmt(c.rim_height);
    }
    return out;
}

std::vector<Crater> to_craters(std::string_view s)
{
    std::vector<Crater> out;
    s = trim(s);
    while (!s.empty()) {
        const auto semi = s.find(';');
        const std::string_view item = trim(s.substr(0, semi));
        if (!item.empty()) {
            const auto v = to_doubles(item, 5);
            out.push_back(Crater{Vec2(v[0], v[1]), v[2], v[3], v[4]});
        }
        if (semi == std::string_view::npos) break;
        s = s.substr(semi + 1);
    }
    return out;
}

struct Field {
    const char* key;
    std::function<std::string(const SimConfig&)> get;
    std::function<void(SimConfig&, std::string_view)> set;
    const char* doc;
};

#define HOPPER_DOUBLE(KEY, MEMBER, DOC)                                                      \
    Field                                                                                    \
    {                                                                                        \
        KEY, [](const SimConfig& c) { return fmt(c.MEMBER); },                               \
            [](SimConfig& c, std::string_view v) { c.MEMBER = to_double(v); }, DOC           \
    }

#define HOPPER_GAINS(PREFIX, MEMBER)                                                         \
    HOPPER_DOUBLE(PREFIX ".kp", gait.MEMBER.kp, "N m/rad"),                                  \
        HOPPER_DOUBLE(PREFIX ".kd", gait.MEMBER.kd, "N m s/rad")

const std::vector<Field>& fields()
{
    static const std::vector<Field> table = {
        HOPPER_DOUBLE("sim.dt", dt, "integration step, s"),
        HOPPER_DOUBLE("sim.control_frequency", control_frequency, "controller rate, Hz"),
        HOPPER_DOUBLE("sim.episode_duration", episode_duration, "s"),
        Field{"sim.gravity_preset",
              [](const SimConfig& c) { return std::string(c.gravity_preset == GravityPreset::kMoon ? "moon" : "custom"); },
              [](SimConfig& c, std::string_view v) {
                  v = trim(v);
                  if (v == "moon") c.gravity_preset = GravityPreset::kMoon;
                  else if (v == "custom") c.gravity_preset = GravityPreset::kCustom;
                  else throw ConfigError("gravity_preset must be moon or custom");
              },
              "moon (1.625 m/s^2) or custom (uses robot.gravity)"},
        Field{"sim.rw_enabled", [](const SimConfig& c) { return std::string(c.rw_enabled ? "true" : "false"); },
              [](SimConfig& c, std::string_view v) { c.rw_enabled = to_bool(v); }, "reaction wheel control on/off"},
        Field{"sim.rng_seed", [](const SimConfig& c) { return std::to_string(c.rng_seed); },
              [](SimConfig& c, std::string_view v) { c.rng_seed = to_u64(v); }, "seeds the terrain noise"},
        Field{"sim.contact_mode",
              [](const SimConfig& c) {
                  return std::string(c.contact_mode == ContactMode::kCompliant ? "compliant" : "rigid_touchdown");
              },
              [](SimConfig& c, std::string_view v) {
                  v = trim(v);
                  if (v == "compliant") c.contact_mode = ContactMode::kCompliant;
                  else if (v == "rigid_touchdown") c.contact_mode = ContactMode::kRigidTouchdown;
                  else throw ConfigError("contact_mode must be compliant or rigid_touchdown");
              },
              "compliant or rigid_touchdown"},
        Field{"sim.integrator",
              [](const SimConfig& c) {
                  return std::string(c.integrator == Integrator::kMomentumConsistent ? "momentum_consistent"
                                                                                     : "semi_implicit");
              },
              [](SimConfig& c, std::string_view v) {
                  v = trim(v);
                  if (v == "momentum_consistent") c.integrator = Integrator::kMomentumConsistent;
                  else if (v == "semi_implicit") c.integrator = Integrator::kSemiImplicit;
                  else throw ConfigError("integrator must be momentum_consistent or semi_implicit");
              },
              "momentum_consistent or semi_implicit"},
        HOPPER_DOUBLE("sim.start_x", start_x, "initial torso x, m"),
        HOPPER_DOUBLE("sim.stand_spread", stand_spread, "initial fore-aft foot offset, m"),

        HOPPER_DOUBLE("robot.torso_mass", robot.torso_mass, "kg"),
        HOPPER_DOUBLE("robot.wheel_mass", robot.wheel_mass, "kg"),
        HOPPER_DOUBLE("robot.upper_leg_mass", robot.upper_leg_mass, "kg, per leg"),
        HOPPER_DOUBLE("robot.lower_leg_mass", robot.lower_leg_mass, "kg, per leg"),
        HOPPER_DOUBLE("robot.upper_leg_length", robot.upper_leg_length, "m"),
        HOPPER_DOUBLE("robot.lower_leg_length", robot.lower_leg_length, "m"),
        HOPPER_DOUBLE("robot.torso_inertia", robot.torso_inertia, "kg m^2 (0.30 x 0.20 m cuboid)"),
        HOPPER_DOUBLE("robot.wheel_inertia", robot.wheel_inertia, "kg m^2 (0.12 m disc)"),
        Field{"robot.hip_range", [](const SimConfig& c) { return fmt_range(c.robot.hip_range); },
              [](SimConfig& c, std::string_view v) { c.robot.hip_range = to_range(v); }, "rad, lo hi"},
        Field{"robot.knee_range", [](const SimConfig& c) { return fmt_range(c.robot.knee_range); },
              [](SimConfig& c, std::string_view v) { c.robot.knee_range = to_range(v); }, "rad, lo hi"},
        HOPPER_DOUBLE("robot.wheel_torque_limit", robot.wheel_torque_limit, "N m"),
        HOPPER_DOUBLE("robot.wheel_speed_limit", robot.wheel_speed_limit, "rad/s (6000 rpm)"),
        HOPPER_DOUBLE("robot.gear_ratio", robot.gear_ratio, "wheel drive reduction"),
        HOPPER_DOUBLE("robot.leg_torque_limit", robot.leg_torque_limit, "N m"),
        HOPPER_DOUBLE("robot.foot_radius", robot.foot_radius, "m"),
        HOPPER_DOUBLE("robot.gravity", robot.gravity, "m/s^2, used with gravity_preset = custom"),

        Field{"terrain.grid_size", [](const SimConfig& c) { return std::to_string(c.terrain.grid_size); },
              [](SimConfig& c, std::string_view v) { c.terrain.grid_size = to_int(v); }, "pixels per side"},
        HOPPER_DOUBLE("terrain.extent", terrain.extent, "m per side"),
        Field{"terrain.craters", [](const SimConfig& c) { return fmt_craters(c.terrain.craters); },
              [](SimConfig& c, std::string_view v) { c.terrain.craters = to_craters(v); },
              "'cx cy radius depth rim; ...' in m (not published values)"},
        HOPPER_DOUBLE("terrain.noise_amplitude", terrain.base_noise_amplitude, "m"),
        HOPPER_DOUBLE("terrain.noise_cell", terrain.noise_cell, "m"),
        HOPPER_DOUBLE("terrain.slice_y", terrain_slice_y, "sagittal slice location, m"),

        HOPPER_DOUBLE("contact.stiffness", contact.stiffness, "N/m"),
        HOPPER_DOUBLE("contact.damping", contact.damping, "N s/m"),
        HOPPER_DOUBLE("contact.friction", contact.friction, "Coulomb coefficient"),
        HOPPER_DOUBLE("contact.slip_velocity", contact.slip_velocity, "m/s"),

        HOPPER_DOUBLE("pid.kp", controller_gains.kp, "N m/rad"),
        HOPPER_DOUBLE("pid.kd", controller_gains.kd, "N m s/rad"),
        HOPPER_DOUBLE("pid.ki", controller_gains.ki, "N m/(rad s)"),
        HOPPER_DOUBLE("pid.integral_limit", integral_limit, "rad s"),
        HOPPER_DOUBLE("desat.gain", desaturation.gain, "N m s"),
        HOPPER_DOUBLE("desat.torque_limit", desaturation.torque_limit, "N m"),

        HOPPER_DOUBLE("gait.crouch_depth", gait.crouch_depth, "m"),
        HOPPER_DOUBLE("gait.crouch_lean", gait.crouch_lean, "m"),
        HOPPER_DOUBLE("gait.crouch_duration", gait.crouch_duration, "s"),
        HOPPER_DOUBLE("gait.pushoff_duration", gait.pushoff_duration, "s"),
        HOPPER_DOUBLE("gait.pushoff_knee_rate", gait.pushoff_knee_rate, "rad/s"),
        HOPPER_DOUBLE("gait.pushoff_final_knee", gait.pushoff_final_knee, "rad"),
        HOPPER_DOUBLE("gait.pushoff_angle", gait.pushoff_angle, "rad"),
        HOPPER_DOUBLE("gait.flight_blend", gait.flight_blend, "s"),
        HOPPER_DOUBLE("gait.stand_offset", gait.stand_offset, "m"),
        HOPPER_DOUBLE("gait.stand_height", gait.stand_height, "m"),
        HOPPER_DOUBLE("gait.stance_settle_threshold", gait.stance_settle_threshold, "rad/s"),
        HOPPER_DOUBLE("gait.stance_min_duration", gait.stance_min_duration, "s"),
        HOPPER_DOUBLE("gait.landing_dwell", gait.landing_dwell, "s"),
        HOPPER_DOUBLE("gait.stance_watchdog", gait.stance_watchdog, "s"),
        HOPPER_GAINS("gait.landing", landing_gains),
        HOPPER_GAINS("gait.stance", stance_gains),
        HOPPER_GAINS("gait.pushoff", pushoff_gains),
        HOPPER_DOUBLE("gait.support.stiffness", gait.support.stiffness, "hip spring per unit mass, 1/s^2"),
        HOPPER_DOUBLE("gait.support.damping", gait.support.damping, "hip damper per unit mass, 1/s"),
        HOPPER_DOUBLE("gait.support.pitch_kp", gait.support.pitch_kp, "N m/rad"),
        HOPPER_DOUBLE("gait.support.pitch_kd", gait.support.pitch_kd, "N m s/rad"),
        HOPPER_GAINS("gait.flight", flight_gains),
        Field{"gait.flight_posture",
              [](const SimConfig& c) {
                  const Vec4& p = c.gait.flight_posture;
                  return fmt(p[0]) + " " + fmt(p[1]) + " " + fmt(p[2]) + " " + fmt(p[3]);
              },
              [](SimConfig& c, std::string_view v) {
                  const auto d = to_doubles(v, 4);
                  c.gait.flight_posture = Vec4(d[0], d[1], d[2], d[3]);
              },
              "rad, hip_L knee_L hip_R knee_R"},
        HOPPER_DOUBLE("compare.threshold", compare_threshold, "percent peak-deviation reduction"),
    };
    return table;
}

#undef HOPPER_GAINS
#undef HOPPER_DOUBLE

const Field* find_field(std::string_view key)
{
    for (const Field& f : fields())
        if (key == f.key) return &f;
    return nullptr;
}

void assign(SimConfig& c, std::string_view key, std::string_view value, int line)
{
    const Field* f = find_field(key);
    if (!f) throw ConfigError("unknown key '" + std::string(key) + "'", line);
    try {
        f->set(c, value);
    } catch (const ConfigError& e) {
        throw ConfigError(std::string(key) + ": " + e.what(), line);
    }
}

}  // namespace

std::vector<std::string> config_keys()
{
    std::vector<std::string> out;
    for (const Field& f : fields()) out.emplace_back(f.key);
    return out;
}

std::string serialize_config(const SimConfig& c)
{
    std::string out;
    for (const Field& f : fields()) {
        out += "# ";
        out += f.doc;
        out += "\n";
        out += f.key;
        out += " = ";
        out += f.get(c);
        out += "\n";
    }
    return out;
}

SimConfig parse_config(std::string_view text)
{
    SimConfig c;
    int line_no = 0;
    while (!text.empty()) {
        ++line_no;
        const auto nl = text.find('\n');
        std::string_view line = text.substr(0, nl);
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        const auto hash = line.find('#');
        if (hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) throw ConfigError("expected 'key = value'", line_no);
        assign(c, trim(line.substr(0, eq)), trim(line.substr(eq + 1)), line_no);
    }
    return c;
}

SimConfig read_config_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read config file '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    try {
        return parse_config(ss.str());
    } catch (const ConfigError& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
}

ValidationReport validate_config(const SimConfig& c)
{
    const RobotParams robot = c.effective_robot();
    ValidationReport r = validate_parameters(robot);
    r.merge(validate_terrain_spec(c.terrain));
    r.merge(validate_contact_params(c.contact));
    r.merge(validate_gait_params(c.gait, robot));

    if (!(c.dt > 0.0)) r.fail("sim.dt must be positive");
    if (!(c.control_frequency > 0.0)) {
        r.fail("sim.control_frequency must be positive");
    } else if (c.dt > 0.0) {
        const double steps = 1.0 / (c.control_frequency * c.dt);
        if (steps < 1.0 - 1e-9 || std::abs(steps - std::round(steps)) > 1e-6)
            r.fail("control period must be an integer multiple of sim.dt");
    }
    if (!(c.episode_duration >= 0.0)) r.fail("sim.episode_duration must be non-negative");
    if (!(c.terrain_slice_y >= 0.0 && c.terrain_slice_y <= c.terrain.extent)) r.fail("terrain.slice_y outside terrain extent");
    if (!(c.start_x >= 0.0 && c.start_x <= c.terrain.extent)) r.fail("sim.start_x outside terrain extent");
    if (!(c.integral_limit >= 0.0)) r.fail("pid.integral_limit must be non-negative");
    if (!(c.desaturation.gain >= 0.0) || !(c.desaturation.torque_limit >= 0.0)) r.fail("desaturation parameters must be non-negative");

    const PidGains& g = c.controller_gains;
    if (g.kp < 0.0 || g.kd < 0.0 || g.ki < 0.0) r.fail("PID gains must be non-negative");
    else if (!closed_loop_stable(g, reduced_pitch_inertia(robot)))
        r.fail("PID gains fail the Routh-Hurwitz closed-loop stability check");
    return r;
}

SimConfig load_config(const std::filesystem::path& path)
{
    SimConfig c = read_config_file(path);
    const ValidationReport r = validate_config(c);
    if (!r.passed()) throw ConfigError(path.string() + ": invalid configuration: " + r.to_string());
    return c;
}

void apply_override(SimConfig& c, std::string_view assignment)
{
    const auto eq = assignment.find('=');
    if (eq == std::string_view::npos) throw ConfigError("override '" + std::string(assignment) + "' is not key=value");
    std::string key(trim(assignment.substr(0, eq)));
    // Bare names resolve to the unique key with that suffix (rw_enabled -> sim.rw_enabled).
    if (!find_field(key)) {
        const Field* match = nullptr;
        int count = 0;
        for (const Field& f : fields()) {
            const std::string_view k = f.key;
            if (k.size() > key.size() && k.substr(k.size() - key.size()) == key && k[k.size() - key.size() - 1] == '.') {
                match = &f;
                ++count;
            }
        }
        if (count == 1) key = match->key;
    }
    assign(c, key, trim(assignment.substr(eq + 1)), 0);
}

}  // namespace hopper
