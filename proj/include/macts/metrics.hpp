#pragma once

#include <algorithm>
#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include "macts/scenario.hpp"

namespace macts {

enum class ProbeMetric { max_global, avg_global, max_local, avg_local };

inline double probe_value(const ProbeRow& row, ProbeMetric m) {
    switch (m) {
    case ProbeMetric::max_global: return row.max_global_us;
    case ProbeMetric::avg_global: return row.avg_global_us;
    case ProbeMetric::max_local: return row.max_local_us;
    case ProbeMetric::avg_local: return row.avg_local_us;
    }
    throw std::logic_error("unreachable");
}

/// Steady-state statistics over the post-convergence window, with 95%
/// confidence intervals (Student-t for the mean, chi-square for the standard
/// deviation).
struct SummaryStats {
    double mean = 0.0;
    double stddev = 0.0;
    double max = 0.0;
    double ci95_mean_lo = 0.0;
    double ci95_mean_hi = 0.0;
    double ci95_std_lo = 0.0;
    double ci95_std_hi = 0.0;
    int sample_count = 0;
    double window_start_s = 0.0;
    double window_end_s = 0.0;
};

struct SteadyStateResult {
    enum class Status { ok, not_converged, insufficient_window };
    Status status = Status::not_converged;
    SummaryStats stats{};

    bool ok() const { return status == Status::ok; }
};

inline SummaryStats summarize_series(const std::vector<double>& values) {
    const int n = static_cast<int>(values.size());
    if (n < 2) throw std::invalid_argument("summary needs at least two samples");
    SummaryStats s;
    s.sample_count = n;
    s.max = values.front();
    double sum = 0.0;
    for (double v : values) {
        sum += v;
        s.max = std::max(s.max, v);
    }
    s.mean = sum / n;
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    const double var = ss / (n - 1);
    s.stddev = std::sqrt(var);

    const boost::math::students_t tdist(n - 1);
    const double tq = boost::math::quantile(tdist, 0.975);
    const double half = tq * s.stddev / std::sqrt(static_cast<double>(n));
    s.ci95_mean_lo = s.mean - half;
    s.ci95_mean_hi = s.mean + half;

    const boost::math::chi_squared chi(n - 1);
    const double chi_hi = boost::math::quantile(chi, 0.975);
    const double chi_lo = boost::math::quantile(chi, 0.025);
    s.ci95_std_lo = std::sqrt((n - 1) * var / chi_hi);
    s.ci95_std_hi = std::sqrt((n - 1) * var / chi_lo);
    return s;
}

/// Post-convergence summary of one probe metric. The window starts
/// `guard_probes` probes after detected convergence to exclude transition
/// transients, and must hold at least `min_probes` samples.
inline SteadyStateResult steady_state_summary(const RunTrace& trace, ProbeMetric metric,
                                              int guard_probes = 2, int min_probes = 30) {
    SteadyStateResult result;
    if (!trace.convergence_time_s) {
        result.status = SteadyStateResult::Status::not_converged;
        return result;
    }
    std::vector<double> window;
    double start_s = 0.0, end_s = 0.0;
    int past_convergence = 0;
    for (const auto& row : trace.probes) {
        if (row.time_s < *trace.convergence_time_s) continue;
        if (past_convergence++ < guard_probes) continue;
        if (window.empty()) start_s = row.time_s;
        end_s = row.time_s;
        window.push_back(probe_value(row, metric));
    }
    if (static_cast<int>(window.size()) < min_probes) {
        result.status = SteadyStateResult::Status::insufficient_window;
        return result;
    }
    result.status = SteadyStateResult::Status::ok;
    result.stats = summarize_series(window);
    result.stats.window_start_s = start_s;
    result.stats.window_end_s = end_s;
    return result;
}

struct HistogramBin {
    double left_us = 0.0;
    std::int64_t count = 0;
};

/// Left-closed histogram with fixed bin width.
inline std::vector<HistogramBin> histogram(const std::vector<double>& series,
                                           double bin_width_us) {
    if (series.empty()) throw std::invalid_argument("histogram of an empty series");
    if (!(bin_width_us > 0.0)) throw std::invalid_argument("bin width must be > 0");
    std::map<std::int64_t, std::int64_t> bins;
    for (double v : series) {
        bins[static_cast<std::int64_t>(std::floor(v / bin_width_us))]++;
    }
    std::vector<HistogramBin> out;
    out.reserve(bins.size());
    for (const auto& [idx, count] : bins) {
        out.push_back({static_cast<double>(idx) * bin_width_us, count});
    }
    return out;
}

/// One run's contribution to the cross-seed aggregation.
struct RunRecord {
    std::string protocol; ///< "ATS" for single-hop, "MACTS" otherwise
    std::string topology;
    int h_initial = 1;
    std::uint64_t seed = 0;
    std::optional<double> convergence_time_s;
    std::optional<std::int64_t> msgs_at_convergence;
    SteadyStateResult steady_max_global{};
};

inline RunRecord make_run_record(const ScenarioConfig& cfg, const RunTrace& trace) {
    RunRecord rec;
    rec.protocol = cfg.h_initial == 1 ? "ATS" : "MACTS";
    rec.topology = cfg.topology.label();
    rec.h_initial = cfg.h_initial;
    rec.seed = cfg.seed;
    rec.convergence_time_s = trace.convergence_time_s;
    if (trace.convergence_time_s) {
        for (const auto& row : trace.probes) {
            if (row.time_s >= *trace.convergence_time_s) {
                rec.msgs_at_convergence = row.msg_total;
                break;
            }
        }
    }
    rec.steady_max_global = steady_state_summary(trace, ProbeMetric::max_global);
    return rec;
}

/// One aggregate row per (protocol, topology, h_initial) group.
struct ConvergenceRow {
    std::string protocol;
    std::string topology;
    int h_initial = 1;
    int runs = 0;
    int converged = 0;
    double median_conv_min = 0.0;
    double min_conv_min = 0.0;
    double max_conv_min = 0.0;
    double mean_msgs_at_convergence = 0.0;
    double mean_steady_max_global_us = 0.0; ///< averaged per-run steady means
    double mean_steady_std_us = 0.0;
    double max_steady_max_global_us = 0.0;
};

inline double median_of(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

/// Aggregate run records across seeds. Requires at least `min_runs` runs per
/// group; groups where nothing converged are reported with converged == 0 and
/// zeroed statistics rather than fabricated ones.
inline std::vector<ConvergenceRow> convergence_table(const std::vector<RunRecord>& records,
                                                     int min_runs = 3) {
    std::map<std::tuple<std::string, std::string, int>, std::vector<const RunRecord*>> groups;
    for (const auto& rec : records) {
        groups[{rec.protocol, rec.topology, rec.h_initial}].push_back(&rec);
    }
    std::vector<ConvergenceRow> rows;
    for (const auto& [key, group] : groups) {
        if (static_cast<int>(group.size()) < min_runs) {
            throw std::invalid_argument("convergence table needs >= " +
                                        std::to_string(min_runs) + " runs per group");
        }
        ConvergenceRow row;
        std::tie(row.protocol, row.topology, row.h_initial) = key;
        row.runs = static_cast<int>(group.size());

        std::vector<double> conv_min;
        double msg_sum = 0.0, steady_mean_sum = 0.0, steady_std_sum = 0.0;
        int steady_count = 0;
        for (const RunRecord* rec : group) {
            if (!rec->convergence_time_s) continue;
            ++row.converged;
            conv_min.push_back(*rec->convergence_time_s / 60.0);
            if (rec->msgs_at_convergence)
                msg_sum += static_cast<double>(*rec->msgs_at_convergence);
            if (rec->steady_max_global.ok()) {
                ++steady_count;
                steady_mean_sum += rec->steady_max_global.stats.mean;
                steady_std_sum += rec->steady_max_global.stats.stddev;
                row.max_steady_max_global_us =
                    std::max(row.max_steady_max_global_us, rec->steady_max_global.stats.max);
            }
        }
        if (row.converged > 0) {
            row.median_conv_min = median_of(conv_min);
            row.min_conv_min = *std::min_element(conv_min.begin(), conv_min.end());
            row.max_conv_min = *std::max_element(conv_min.begin(), conv_min.end());
            row.mean_msgs_at_convergence = msg_sum / row.converged;
        }
        if (steady_count > 0) {
            row.mean_steady_max_global_us = steady_mean_sum / steady_count;
            row.mean_steady_std_us = steady_std_sum / steady_count;
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

} // namespace macts
