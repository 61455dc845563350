#pragma once

#include "hopper/sim.hpp"

#include <cstddef>
#include <string>
#include <vector>

namespace hopper {

/// Record indices bounding one hop. A hop is a PushOff -> Flight -> Landing
/// sequence; its cycle runs from push-off start to the next push-off start
/// (or the end of the log).
struct HopInterval {
    int hop_index = 0;
    std::size_t pushoff_start = 0;
    std::size_t flight_start = 0;  // first Flight record
    std::size_t touchdown = 0;     // first Landing record; log end for a terminal flight
    std::size_t cycle_end = 0;     // one past the last record of the cycle
    std::size_t reference = 0;     // previous touchdown (record 0 for the first hop)
    bool landed = true;            // false only for a terminal flight that never touched down
};

/// Completed hops in log order. With `include_terminal_flight` a trailing
/// flight that never lands (e.g. the robot tumbled and the episode ended) is
/// appended with landed = false.
std::vector<HopInterval> segment_hops(const TrajectoryLog& log, bool include_terminal_flight = false);

enum class RmsWindow { kCycle, kFlight };

struct HopMetrics {
    int hop_index = 0;
    double flight_start = 0.0;  // s
    double flight_end = 0.0;    // s
    double peak_pitch_deviation = 0.0;  // deg, max |theta| over the flight
    double rms_pitch_rate = 0.0;        // deg/s
    double landing_pitch_error = 0.0;   // deg, |theta| at touchdown
    double saturation_time = 0.0;       // s
    double hop_distance = 0.0;          // m, CoM x between touchdowns
    double apex_height = 0.0;           // m, CoM rise above lift-off
    double touchdown_x = 0.0;           // m, CoM x at touchdown
    bool landed = true;
};

HopMetrics hop_metrics(const TrajectoryLog& log, const HopInterval& interval, RmsWindow window = RmsWindow::kCycle);

std::vector<HopMetrics> all_hop_metrics(const TrajectoryLog& log, RmsWindow window = RmsWindow::kCycle);

/// Peaks above this are treated as a tumble and capped for comparison.
constexpr double kTumbleDeg = 90.0;

struct HopComparison {
    int hop_index = 0;
    double peak_on = 0.0;   // deg
    double peak_off = 0.0;  // deg, capped at kTumbleDeg
    double reduction = 0.0; // percent
    bool uncontrolled = false;  // RW-off hop tumbled
};

struct ComparisonReport {
    std::vector<HopComparison> hops;
    double aggregate_reduction = 0.0;  // percent, 1 - sum(on) / sum(off)
    int hops_on = 0;
    int hops_off = 0;
    bool off_tumbled = false;
};

/// Throws hopper::Error if the two logs were produced by configs that differ
/// in anything other than rw_enabled.
ComparisonReport compare_runs(const TrajectoryLog& log_on, const TrajectoryLog& log_off);

/// Percent reduction of `on` relative to `off` (0 when off is 0).
double percent_reduction(double on, double off);

std::string metrics_csv(const std::vector<HopMetrics>& hops);
std::string summary_report(const TrajectoryLog& log, const std::vector<HopMetrics>& hops);
std::string comparison_csv(const ComparisonReport& report);
std::string comparison_text(const ComparisonReport& report, double threshold);

}  // namespace hopper
