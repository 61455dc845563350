#include "hopper/cli.hpp"

#include "hopper/config.hpp"
#include "hopper/io.hpp"
#include "hopper/metrics.hpp"
#include "hopper/sim.hpp"
#include "hopper/terrain.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <ostream>

namespace hopper::cli {

namespace {

namespace fs = std::filesystem;

// Config file (or defaults) with seed and overrides applied; not validated.
SimConfig assemble_config(const CommandSpec& spec)
{
    SimConfig c = spec.config_path ? read_config_file(*spec.config_path) : SimConfig{};
    for (const std::string& o : spec.overrides) apply_override(c, o);
    if (spec.seed) c.rng_seed = *spec.seed;
    if (spec.threshold) c.compare_threshold = *spec.threshold;
    return c;
}

std::optional<SimConfig> load_validated(const CommandSpec& spec, std::ostream& err)
{
    try {
        SimConfig c = assemble_config(spec);
        const ValidationReport rep = validate_config(c);
        if (!rep.passed()) {
            err << "invalid configuration:\n" << rep.to_string() << "\n";
            return std::nullopt;
        }
        return c;
    } catch (const Error& e) {
        err << "config error: " << e.what() << "\n";
        return std::nullopt;
    }
}

bool prepare_output(const fs::path& dir, std::ostream& err)
{
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) {
        err << "cannot create output directory " << dir.string() << "\n";
        return false;
    }
    return true;
}

std::string pgm_string(const Heightfield& hf)
{
    const auto bytes = encode_pgm16(hf);
    return std::string(bytes.begin(), bytes.end());
}

std::string profile_csv(const TerrainProfile& p)
{
    std::string out = "x,height,slope\n";
    for (std::size_t i = 0; i < p.samples().size(); ++i) {
        out += io::format_double(static_cast<double>(i) * p.spacing()) + "," + io::format_double(p.samples()[i]) +
               "," + io::format_double(p.slopes()[i]) + "\n";
    }
    return out;
}

}  // namespace

int cmd_run(const CommandSpec& spec, std::ostream& out, std::ostream& err)
{
    const auto config = load_validated(spec, err);
    if (!config) return exit_code::kError;
    if (!prepare_output(spec.output_dir, err)) return exit_code::kError;

    const TrajectoryLog log = run_episode(*config);
    const auto hops = all_hop_metrics(log);
    try {
        io::AtomicBatch batch(spec.output_dir);
        batch.stage("trajectory.csv", trajectory_csv(log));
        batch.stage("trajectory_meta.txt", metadata_text(log));
        batch.stage("metrics.csv", metrics_csv(hops));
        batch.stage("summary.txt", summary_report(log, hops));
        batch.commit();
    } catch (const Error& e) {
        err << "write failed: " << e.what() << "\n";
        return exit_code::kError;
    }
    out << summary_report(log, hops);
    if (log.meta.aborted) {
        err << "episode aborted: " << log.meta.abort_reason << "\n";
        return exit_code::kAborted;
    }
    return hops.empty() ? exit_code::kAborted : exit_code::kOk;
}

int cmd_compare(const CommandSpec& spec, std::ostream& out, std::ostream& err)
{
    const auto config = load_validated(spec, err);
    if (!config) return exit_code::kError;
    if (!prepare_output(spec.output_dir, err)) return exit_code::kError;

    SimConfig on = *config;
    on.rw_enabled = true;
    SimConfig off = *config;
    off.rw_enabled = false;
    const TrajectoryLog log_on = run_episode(on);
    const TrajectoryLog log_off = run_episode(off);

    ComparisonReport rep;
    try {
        rep = compare_runs(log_on, log_off);
    } catch (const Error& e) {
        err << e.what() << "\n";
        return exit_code::kError;
    }
    const std::string text = comparison_text(rep, config->compare_threshold);
    try {
        io::AtomicBatch batch(spec.output_dir);
        batch.stage("comparison.csv", comparison_csv(rep));
        batch.stage("comparison.txt", text);
        batch.stage("metrics_on.csv", metrics_csv(all_hop_metrics(log_on)));
        batch.stage("metrics_off.csv", metrics_csv(all_hop_metrics(log_off)));
        batch.commit();
    } catch (const Error& e) {
        err << "write failed: " << e.what() << "\n";
        return exit_code::kError;
    }
    out << text;
    if (log_on.meta.aborted) {
        err << "wheel-on episode aborted: " << log_on.meta.abort_reason << "\n";
        return exit_code::kAborted;
    }
    if (rep.hops.empty()) return exit_code::kAborted;
    return rep.aggregate_reduction >= config->compare_threshold ? exit_code::kOk : exit_code::kBelowThreshold;
}

int cmd_terrain(const CommandSpec& spec, std::ostream& out, std::ostream& err)
{
    const auto config = load_validated(spec, err);
    if (!config) return exit_code::kError;
    if (!prepare_output(spec.output_dir, err)) return exit_code::kError;
    try {
        const World world = make_world(*config);
        io::AtomicBatch batch(spec.output_dir);
        batch.stage("terrain.pgm", pgm_string(world.heightfield));
        batch.stage("profile.csv", profile_csv(world.terrain));
        batch.commit();
        out << "terrain " << world.heightfield.size() << "x" << world.heightfield.size() << ", elevation ["
            << io::format_double(world.heightfield.min_elevation()) << ", "
            << io::format_double(world.heightfield.max_elevation()) << "] m\n";
    } catch (const Error& e) {
        err << e.what() << "\n";
        return exit_code::kError;
    }
    return exit_code::kOk;
}

int cmd_validate(const CommandSpec& spec, std::ostream& out, std::ostream& err)
{
    SimConfig c;
    try {
        c = assemble_config(spec);
    } catch (const Error& e) {
        err << "config error: " << e.what() << "\n";
        return exit_code::kError;
    }
    const ValidationReport rep = validate_config(c);
    const RobotParams robot = c.effective_robot();
    const bool stable = closed_loop_stable(c.controller_gains, reduced_pitch_inertia(robot));
    out << rep.to_string() << "\n";
    out << "closed-loop gain check: " << (stable ? "stable" : "unstable") << "\n";
    return rep.passed() && stable ? exit_code::kOk : exit_code::kError;
}

int dispatch(const CommandSpec& spec, std::ostream& out, std::ostream& err)
{
    switch (spec.subcommand) {
    case Subcommand::kRun: return cmd_run(spec, out, err);
    case Subcommand::kCompare: return cmd_compare(spec, out, err);
    case Subcommand::kTerrain: return cmd_terrain(spec, out, err);
    case Subcommand::kValidate: return cmd_validate(spec, out, err);
    }
    return exit_code::kError;
}

int main(int argc, char** argv)
{
    CLI::App app{"Planar reaction-wheel biped hopper in lunar gravity"};
    app.require_subcommand(1);

    CommandSpec spec;
    std::string config_path;
    std::string output_dir = "out";
    std::uint64_t seed = 0;
    double threshold = 0.0;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "config file (key = value)")->check(CLI::ExistingFile);
        sub->add_option("--out", output_dir, "output directory");
        sub->add_option("--seed", seed, "RNG seed override");
        sub->add_option("--override", spec.overrides, "key=value, repeatable")->take_last()->multi_option_policy(
            CLI::MultiOptionPolicy::TakeAll);
    };
    CLI::App* run = app.add_subcommand("run", "simulate one episode");
    CLI::App* compare = app.add_subcommand("compare", "reaction wheel on vs off");
    CLI::App* terrain = app.add_subcommand("terrain", "export heightmap and profile");
    CLI::App* validate = app.add_subcommand("validate", "check parameters and gains");
    for (CLI::App* sub : {run, compare, terrain, validate}) add_common(sub);
    compare->add_option("--threshold", threshold, "required aggregate reduction, percent");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : exit_code::kError;
    }

    if (run->parsed()) spec.subcommand = Subcommand::kRun;
    if (compare->parsed()) spec.subcommand = Subcommand::kCompare;
    if (terrain->parsed()) spec.subcommand = Subcommand::kTerrain;
    if (validate->parsed()) spec.subcommand = Subcommand::kValidate;

    CLI::App* active = app.get_subcommands().front();
    if (!config_path.empty()) spec.config_path = config_path;
    spec.output_dir = output_dir;
    if (active->count("--seed")) spec.seed = seed;
    if (active == compare && compare->count("--threshold")) spec.threshold = threshold;

    return dispatch(spec, std::cout, std::cerr);
}

}  // namespace hopper::cli
