#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "macts/topology.hpp"

namespace macts {

/// Topology description carried by a scenario: grid, line or connected random
/// geometric graph.
struct TopologySpec {
    std::string kind = "grid"; ///< "grid" | "line" | "random"
    int rows = 5;              ///< grid
    int cols = 5;              ///< grid
    int n = 9;                 ///< line / random
    double radius = 0.3;       ///< random
    int max_attempts = 100;    ///< random

    std::string label() const {
        if (kind == "grid") return "grid" + std::to_string(rows) + "x" + std::to_string(cols);
        if (kind == "line") return "line" + std::to_string(n);
        return "random" + std::to_string(n);
    }
};

inline Topology build_topology(const TopologySpec& spec, std::uint64_t seed) {
    if (spec.kind == "grid") return build_grid(spec.rows, spec.cols);
    if (spec.kind == "line") return build_line(spec.n);
    if (spec.kind == "random")
        return build_random_geometric(spec.n, spec.radius, seed, spec.max_attempts);
    throw std::invalid_argument("unknown topology kind: " + spec.kind);
}

/// Full experiment description. Key names carry their units.
struct ScenarioConfig {
    TopologySpec topology;
    double broadcast_period_s = 30.0;
    double sim_duration_s = 3600.0;
    double delay_mean_us = 3.33;
    double delay_std_us = 0.07;
    double drift_ppm_bound = 40.0;
    double boot_offset_max_s = 500.0;
    int h_initial = 2;
    double xi_us = 5.0;
    double rho_v = 0.5;
    double d_fixed_us = 3.33;
    double forward_latency_us = 500.0;
    double measurement_interval_s = 10.0;
    double convergence_threshold_us = 20.0;
    double loss_probability = 0.0; ///< reserved hook; deliveries always succeed at 0
    bool raw_local_error = false;
    bool first_crossing_convergence = false;
    std::int64_t max_events = 200000000;
    std::uint64_t seed = 1;

    void validate() const {
        if (!(broadcast_period_s > 0.0)) throw std::invalid_argument("broadcast_period_s must be > 0");
        if (!(sim_duration_s > 0.0)) throw std::invalid_argument("sim_duration_s must be > 0");
        if (!(delay_mean_us > 0.0)) throw std::invalid_argument("delay_mean_us must be > 0");
        if (delay_std_us < 0.0) throw std::invalid_argument("delay_std_us must be >= 0");
        if (drift_ppm_bound < 0.0) throw std::invalid_argument("drift_ppm_bound must be >= 0");
        if (boot_offset_max_s < 0.0) throw std::invalid_argument("boot_offset_max_s must be >= 0");
        if (h_initial < 1) throw std::invalid_argument("h_initial must be >= 1");
        if (!(xi_us > 0.0)) throw std::invalid_argument("xi_us must be > 0");
        if (!(rho_v > 0.0 && rho_v < 1.0)) throw std::invalid_argument("rho_v must lie in (0,1)");
        if (d_fixed_us < 0.0) throw std::invalid_argument("d_fixed_us must be >= 0");
        if (forward_latency_us < 0.0) throw std::invalid_argument("forward_latency_us must be >= 0");
        if (!(measurement_interval_s > 0.0))
            throw std::invalid_argument("measurement_interval_s must be > 0");
        if (!(convergence_threshold_us > 0.0))
            throw std::invalid_argument("convergence_threshold_us must be > 0");
        if (loss_probability < 0.0 || loss_probability >= 1.0)
            throw std::invalid_argument("loss_probability must lie in [0,1)");
        if (max_events < 1) throw std::invalid_argument("max_events must be >= 1");
    }
};

/// One sink-style measurement: every logical clock read at the same true
/// instant, global statistics over all pairs, local over radio-adjacent pairs.
struct ProbeRow {
    double time_s = 0.0;
    double max_global_us = 0.0;
    double avg_global_us = 0.0;
    double max_local_us = 0.0;
    double avg_local_us = 0.0;
    std::int64_t msg_total = 0;    ///< cumulative, origins + forwards
    std::int64_t msg_forwards = 0; ///< cumulative forwards only
};

struct HopChange {
    double time_s = 0.0;
    int node = 0;
    int h = 1;
};

struct RunTrace {
    int node_count = 0;
    std::vector<ProbeRow> probes;
    std::vector<HopChange> hop_changes; ///< includes each node's initial depth at t=0
    std::optional<double> convergence_time_s;
    std::int64_t msg_origin = 0;
    std::int64_t msg_forwards = 0;
    std::int64_t dropped_malformed = 0;
    /// Worst |(offset est - true offset) - (delay - compensation)| over all
    /// origin-packet receptions; bounded by two readout quantizations.
    double max_offset_residual_dev_us = 0.0;
};

} // namespace macts
