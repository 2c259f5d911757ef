#pragma once

#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "macts/config_io.hpp"
#include "macts/metrics.hpp"
#include "macts/scenario.hpp"
#include "macts/spectral.hpp"

namespace macts {

inline std::string format_us(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

inline std::string format_s(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.3f", v);
    return buf;
}

/// Provenance block: the fully resolved config as "# key=value" lines, so any
/// output file is reproducible from its own header.
inline void write_provenance(std::ostream& os, const ScenarioConfig& cfg) {
    for (const auto& [key, value] : flatten(to_json(cfg))) {
        os << "# " << key << "=" << value << "\n";
    }
}

inline void write_trace_csv(std::ostream& os, const ScenarioConfig& cfg, const RunTrace& trace) {
    write_provenance(os, cfg);
    os << "probe_time_s,max_global_us,avg_global_us,max_local_us,avg_local_us,"
          "msg_total,msg_forwards\n";
    for (const auto& row : trace.probes) {
        os << format_s(row.time_s) << "," << format_us(row.max_global_us) << ","
           << format_us(row.avg_global_us) << "," << format_us(row.max_local_us) << ","
           << format_us(row.avg_local_us) << "," << row.msg_total << "," << row.msg_forwards
           << "\n";
    }
}

inline std::string trace_csv_string(const ScenarioConfig& cfg, const RunTrace& trace) {
    std::ostringstream os;
    write_trace_csv(os, cfg, trace);
    return os.str();
}

/// Flat key=value run summary: resolved config, spectral report, convergence
/// and message statistics, and the steady-state summary when available.
inline void write_summary(std::ostream& os, const ScenarioConfig& cfg, const RunTrace& trace,
                          const SpectralReport& spectral) {
    for (const auto& [key, value] : flatten(to_json(cfg))) {
        os << "config." << key << "=" << value << "\n";
    }
    for (std::size_t h = 0; h < spectral.lambda2_per_hop.size(); ++h) {
        os << "spectral.lambda2_hop" << (h + 1) << "=" << format_us(spectral.lambda2_per_hop[h])
           << "\n";
    }
    os << "spectral.lambda2_union=" << format_us(spectral.lambda2_union) << "\n";
    os << "spectral.lower_bound=" << format_us(spectral.lower_bound) << "\n";
    os << "spectral.upper_bound=" << format_us(spectral.upper_bound) << "\n";
    os << "result.converged=" << (trace.convergence_time_s ? "true" : "false") << "\n";
    if (trace.convergence_time_s) {
        os << "result.convergence_time_s=" << format_s(*trace.convergence_time_s) << "\n";
    }
    os << "result.msg_origin=" << trace.msg_origin << "\n";
    os << "result.msg_forwards=" << trace.msg_forwards << "\n";
    os << "result.msg_total=" << (trace.msg_origin + trace.msg_forwards) << "\n";
    os << "result.max_offset_residual_dev_us=" << format_us(trace.max_offset_residual_dev_us)
       << "\n";
    const SteadyStateResult steady = steady_state_summary(trace, ProbeMetric::max_global);
    if (steady.ok()) {
        os << "steady.max_global_mean_us=" << format_us(steady.stats.mean) << "\n";
        os << "steady.max_global_std_us=" << format_us(steady.stats.stddev) << "\n";
        os << "steady.max_global_max_us=" << format_us(steady.stats.max) << "\n";
        os << "steady.ci95_mean_lo_us=" << format_us(steady.stats.ci95_mean_lo) << "\n";
        os << "steady.ci95_mean_hi_us=" << format_us(steady.stats.ci95_mean_hi) << "\n";
        os << "steady.sample_count=" << steady.stats.sample_count << "\n";
    } else {
        os << "steady.status="
           << (steady.status == SteadyStateResult::Status::not_converged ? "not_converged"
                                                                         : "insufficient_window")
           << "\n";
    }
}

inline void write_histogram_csv(std::ostream& os, const std::vector<HistogramBin>& bins) {
    os << "bin_left_us,count\n";
    for (const auto& bin : bins) os << format_us(bin.left_us) << "," << bin.count << "\n";
}

inline void write_convergence_csv(std::ostream& os, const std::vector<ConvergenceRow>& rows) {
    os << "protocol,topology,mean_us,std,max_us,conv_time_min_lo,conv_time_min_hi,"
          "msgs_at_convergence\n";
    for (const auto& row : rows) {
        os << row.protocol << (row.h_initial > 1 ? "_H" + std::to_string(row.h_initial) : "")
           << "," << row.topology << ",";
        if (row.converged > 0) {
            os << format_us(row.mean_steady_max_global_us) << ","
               << format_us(row.mean_steady_std_us) << ","
               << format_us(row.max_steady_max_global_us) << ","
               << format_s(row.min_conv_min) << "," << format_s(row.max_conv_min) << ","
               << format_s(row.mean_msgs_at_convergence) << "\n";
        } else {
            os << "none_converged,,,,,\n";
        }
    }
}

inline void write_spectral_csv(std::ostream& os, const Topology& t, int h_max) {
    os << "H,lambda2_union,lower_bound,upper_bound\n";
    for (int h = 1; h <= h_max; ++h) {
        const SpectralReport report = spectral_report(t, h);
        os << h << "," << format_us(report.lambda2_union) << ","
           << format_us(report.lower_bound) << "," << format_us(report.upper_bound) << "\n";
    }
}

inline void write_file(const std::string& path, const std::string& contents) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open output file: " + path);
    out << contents;
    if (!out) throw std::runtime_error("failed writing output file: " + path);
}

} // namespace macts
