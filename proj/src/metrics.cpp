#include "hopper/metrics.hpp"

#include "hopper/io.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace hopper {

namespace {

bool entering(const std::vector<LogRecord>& r, std::size_t i, HopperPhase phase)
{
    return r[i].phase == phase && (i == 0 || r[i - 1].phase != phase);
}

}  // namespace

std::vector<HopInterval> segment_hops(const TrajectoryLog& log, bool include_terminal_flight)
{
    const auto& r = log.records;
    std::vector<HopInterval> hops;
    std::size_t reference = 0;
    std::size_t i = 0;
    while (i < r.size()) {
        if (!entering(r, i, HopperPhase::kPushOff)) {
            ++i;
            continue;
        }
        HopInterval h;
        h.pushoff_start = i;
        std::size_t j = i;
        while (j < r.size() && r[j].phase == HopperPhase::kPushOff) ++j;
        if (j == r.size() || r[j].phase != HopperPhase::kFlight) {
            i = j;
            continue;
        }
        h.flight_start = j;
        while (j < r.size() && r[j].phase == HopperPhase::kFlight) ++j;
        if (j == r.size()) {
            if (include_terminal_flight) {
                h.touchdown = r.size() - 1;
                h.cycle_end = r.size();
                h.reference = reference;
                h.landed = false;
                h.hop_index = static_cast<int>(hops.size());
                hops.push_back(h);
            }
            break;
        }
        h.touchdown = j;
        h.reference = reference;
        reference = j;
        std::size_t k = j;
        while (k < r.size() && !entering(r, k, HopperPhase::kPushOff)) ++k;
        h.cycle_end = k;
        h.hop_index = static_cast<int>(hops.size());
        hops.push_back(h);
        i = k;
    }
    return hops;
}

HopMetrics hop_metrics(const TrajectoryLog& log, const HopInterval& h, RmsWindow window)
{
    const auto& r = log.records;
    HopMetrics m;
    m.hop_index = h.hop_index;
    m.landed = h.landed;
    m.flight_start = r[h.flight_start].t;
    m.flight_end = r[h.touchdown].t;

    double peak = 0.0;
    double apex = r[h.flight_start].com.y();
    // The touchdown record closes the window so the peak bounds the landing error.
    for (std::size_t i = h.flight_start; i <= h.touchdown; ++i) {
        peak = std::max(peak, std::abs(r[i].pitch()));
        apex = std::max(apex, r[i].com.y());
    }
    m.peak_pitch_deviation = rad2deg(peak);
    m.apex_height = apex - r[h.flight_start].com.y();
    m.landing_pitch_error = rad2deg(std::abs(r[h.touchdown].pitch()));

    const std::size_t a = window == RmsWindow::kCycle ? h.pushoff_start : h.flight_start;
    const std::size_t b = window == RmsWindow::kCycle ? h.cycle_end : h.touchdown;
    double sum = 0.0;
    for (std::size_t i = a; i < b; ++i) sum += r[i].pitch_rate() * r[i].pitch_rate();
    m.rms_pitch_rate = b > a ? rad2deg(std::sqrt(sum / static_cast<double>(b - a))) : 0.0;

    double sat = 0.0;
    for (std::size_t i = h.pushoff_start; i < h.cycle_end; ++i) sat = std::max(sat, r[i].saturation_time);
    m.saturation_time = sat;

    m.touchdown_x = r[h.touchdown].com.x();
    m.hop_distance = m.touchdown_x - r[h.reference].com.x();
    return m;
}

std::vector<HopMetrics> all_hop_metrics(const TrajectoryLog& log, RmsWindow window)
{
    std::vector<HopMetrics> out;
    for (const HopInterval& h : segment_hops(log)) out.push_back(hop_metrics(log, h, window));
    return out;
}

double percent_reduction(double on, double off)
{
    if (!(off > 0.0)) return 0.0;
    return 100.0 * (1.0 - on / off);
}

ComparisonReport compare_runs(const TrajectoryLog& log_on, const TrajectoryLog& log_off)
{
    SimConfig a = parse_config(log_on.meta.config_text);
    SimConfig b = parse_config(log_off.meta.config_text);
    a.rw_enabled = b.rw_enabled;
    if (!(a == b)) throw Error("compared runs must share a config apart from rw_enabled");

    const auto on = segment_hops(log_on);
    const auto off = segment_hops(log_off, true);
    ComparisonReport rep;
    rep.hops_on = static_cast<int>(on.size());
    rep.hops_off = static_cast<int>(off.size());

    double sum_on = 0.0;
    double sum_off = 0.0;
    const std::size_t n = std::min(on.size(), off.size());
    for (std::size_t i = 0; i < n; ++i) {
        const HopMetrics m_on = hop_metrics(log_on, on[i]);
        const HopMetrics m_off = hop_metrics(log_off, off[i]);
        HopComparison c;
        c.hop_index = static_cast<int>(i);
        c.peak_on = std::min(m_on.peak_pitch_deviation, kTumbleDeg);
        c.uncontrolled = m_off.peak_pitch_deviation > kTumbleDeg;
        c.peak_off = std::min(m_off.peak_pitch_deviation, kTumbleDeg);
        c.reduction = percent_reduction(c.peak_on, c.peak_off);
        rep.off_tumbled = rep.off_tumbled || c.uncontrolled;
        sum_on += c.peak_on;
        sum_off += c.peak_off;
        rep.hops.push_back(c);
    }
    rep.aggregate_reduction = percent_reduction(sum_on, sum_off);
    return rep;
}

std::string metrics_csv(const std::vector<HopMetrics>& hops)
{
    std::string out = "hop,flight_start,flight_end,peak_pitch_deg,rms_pitch_rate_deg_s,landing_error_deg,"
                      "saturation_time,hop_distance,apex_height,touchdown_x\n";
    for (const HopMetrics& m : hops) {
        out += std::to_string(m.hop_index);
        for (double v : {m.flight_start, m.flight_end, m.peak_pitch_deviation, m.rms_pitch_rate,
                         m.landing_pitch_error, m.saturation_time, m.hop_distance, m.apex_height, m.touchdown_x}) {
            out += ',';
            out += io::format_double(v);
        }
        out += '\n';
    }
    return out;
}

namespace {

std::string fixed(double v, int digits)
{
    std::ostringstream os;
    os.setf(std::ios::fixed);
    os.precision(digits);
    os << v;
    return os.str();
}

}  // namespace

std::string summary_report(const TrajectoryLog& log, const std::vector<HopMetrics>& hops)
{
    std::ostringstream os;
    os << "config_hash " << log.meta.config_hash << "  seed " << log.meta.seed << "\n";
    os << "duration " << fixed(log.records.empty() ? 0.0 : log.records.back().t, 3) << " s, " << hops.size()
       << " hops";
    if (log.meta.aborted) os << ", aborted: " << log.meta.abort_reason;
    os << "\n\n";
    os << "hop  peak[deg]  landing[deg]  rms[deg/s]  sat[s]  distance[m]  apex[m]\n";
    double worst_landing = 0.0;
    double worst_peak = 0.0;
    for (const HopMetrics& m : hops) {
        os << m.hop_index << "  " << fixed(m.peak_pitch_deviation, 2) << "  " << fixed(m.landing_pitch_error, 2)
           << "  " << fixed(m.rms_pitch_rate, 2) << "  " << fixed(m.saturation_time, 3) << "  "
           << fixed(m.hop_distance, 3) << "  " << fixed(m.apex_height, 3) << "\n";
        worst_landing = std::max(worst_landing, m.landing_pitch_error);
        worst_peak = std::max(worst_peak, m.peak_pitch_deviation);
    }
    if (!hops.empty())
        os << "\nworst peak " << fixed(worst_peak, 2) << " deg, worst landing " << fixed(worst_landing, 2) << " deg\n";
    return os.str();
}

std::string comparison_csv(const ComparisonReport& rep)
{
    std::string out = "hop,peak_on_deg,peak_off_deg,reduction_pct,uncontrolled\n";
    for (const HopComparison& c : rep.hops) {
        out += std::to_string(c.hop_index) + "," + io::format_double(c.peak_on) + "," +
               io::format_double(c.peak_off) + "," + io::format_double(c.reduction) + "," +
               (c.uncontrolled ? "1" : "0") + "\n";
    }
    return out;
}

std::string comparison_text(const ComparisonReport& rep, double threshold)
{
    std::ostringstream os;
    os << "hops: " << rep.hops_on << " with wheel, " << rep.hops_off << " without\n\n";
    os << "hop  peak_on[deg]  peak_off[deg]  reduction[%]\n";
    for (const HopComparison& c : rep.hops) {
        os << c.hop_index << "  " << fixed(c.peak_on, 2) << "  " << fixed(c.peak_off, 2) << "  "
           << fixed(c.reduction, 1);
        if (c.uncontrolled) os << "  uncontrolled";
        os << "\n";
    }
    os << "\naggregate reduction " << fixed(rep.aggregate_reduction, 1) << " % (threshold " << fixed(threshold, 1)
       << " %): " << (rep.aggregate_reduction >= threshold ? "pass" : "fail") << "\n";
    return os.str();
}

}  // namespace hopper
