#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace hopper::cli {

enum class Subcommand { kRun, kCompare, kTerrain, kValidate };

struct CommandSpec {
    Subcommand subcommand = Subcommand::kRun;
    std::optional<std::filesystem::path> config_path;  // defaults when absent
    std::filesystem::path output_dir = "out";
    std::vector<std::string> overrides;  // key=value
    std::optional<std::uint64_t> seed;
    std::optional<double> threshold;  // compare only, percent
};

namespace exit_code {
constexpr int kOk = 0;
constexpr int kError = 1;         // config, validation or I/O failure
constexpr int kAborted = 2;       // episode aborted or produced no hop
constexpr int kBelowThreshold = 3;  // compare: reduction under the threshold
}  // namespace exit_code

int cmd_run(const CommandSpec& spec, std::ostream& out, std::ostream& err);
int cmd_compare(const CommandSpec& spec, std::ostream& out, std::ostream& err);
int cmd_terrain(const CommandSpec& spec, std::ostream& out, std::ostream& err);
int cmd_validate(const CommandSpec& spec, std::ostream& out, std::ostream& err);

int dispatch(const CommandSpec& spec, std::ostream& out, std::ostream& err);

/// Parses argv and dispatches.
int main(int argc, char** argv);

}  // namespace hopper::cli
