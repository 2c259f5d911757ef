#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <queue>
#include <random>
#include <stdexcept>
#include <vector>

#include "macts/protocol.hpp"
#include "macts/rng.hpp"
#include "macts/scenario.hpp"
#include "macts/topology.hpp"

namespace macts {

/// Positive normal draw: resample until the value is > 0. With std 0 the
/// mean is returned directly.
inline double sample_delay(std::mt19937_64& rng, double mean_us, double std_us) {
    if (std_us < 0.0) throw std::invalid_argument("delay std must be >= 0");
    if (std_us == 0.0) return mean_us;
    std::normal_distribution<double> dist(mean_us, std_us);
    double d = dist(rng);
    while (d <= 0.0) d = dist(rng);
    return d;
}

struct ErrorSample {
    double max_global_us = 0.0;
    double avg_global_us = 0.0;
    double max_local_us = 0.0;
    double avg_local_us = 0.0;
};

/// Synchronization error of a snapshot of logical readings taken at one true
/// instant: max/mean |L_i - L_j| over all pairs (global) and over
/// radio-adjacent pairs (local).
inline ErrorSample measurement_probe(const std::vector<std::int64_t>& readings,
                                     const Topology& t) {
    ErrorSample s;
    const int n = static_cast<int>(readings.size());
    if (n < 2) return s;

    std::vector<std::int64_t> sorted = readings;
    std::sort(sorted.begin(), sorted.end());
    s.max_global_us = static_cast<double>(sorted.back() - sorted.front());
    // sum over pairs |L_i - L_j| = sum_k (2k - n + 1) * sorted[k]
    double pair_sum = 0.0;
    for (int k = 0; k < n; ++k) {
        pair_sum += static_cast<double>(2 * k - n + 1) * static_cast<double>(sorted[k]);
    }
    s.avg_global_us = pair_sum / (0.5 * n * (n - 1));

    double local_sum = 0.0;
    for (const auto& e : t.edges) {
        const double d = std::abs(static_cast<double>(readings[e.u] - readings[e.v]));
        s.max_local_us = std::max(s.max_local_us, d);
        local_sum += d;
    }
    if (!t.edges.empty()) s.avg_local_us = local_sum / static_cast<double>(t.edges.size());
    return s;
}

/// Convergence instant of a probe series. Default rule: the first probe from
/// which the maximal global error stays below the threshold for the rest of
/// the run. The first-crossing alternative takes the first probe under the
/// threshold regardless of what follows.
inline std::optional<double> detect_convergence(const std::vector<ProbeRow>& probes,
                                                double threshold_us,
                                                bool first_crossing = false) {
    if (first_crossing) {
        for (const auto& p : probes)
            if (p.max_global_us < threshold_us) return p.time_s;
        return std::nullopt;
    }
    std::optional<double> candidate;
    for (auto it = probes.rbegin(); it != probes.rend(); ++it) {
        if (it->max_global_us < threshold_us) {
            candidate = it->time_s;
        } else {
            break;
        }
    }
    return candidate;
}

namespace detail {

enum class EventKind : int {
    broadcast_timer = 0,
    packet_delivery = 1,
    forward_transmit = 2,
    measurement_probe = 3,
};

struct Event {
    std::int64_t t_ns = 0;
    EventKind kind = EventKind::broadcast_timer;
    int node = 0;
    std::uint64_t seq = 0; ///< insertion order, final tiebreak
    SyncMessage msg{};
    double delay_sample_us = 0.0;      ///< delivery only: the drawn delay
    std::int64_t rx_reading_at_tx = 0; ///< delivery only: receiver logical readout at transmit
    int forward_hop = 0;               ///< forward only
    int forward_origin = 0;       ///< forward only
    std::int64_t forward_wave = 0;
};

struct EventAfter {
    bool operator()(const Event& a, const Event& b) const {
        if (a.t_ns != b.t_ns) return a.t_ns > b.t_ns;
        if (a.kind != b.kind) return static_cast<int>(a.kind) > static_cast<int>(b.kind);
        if (a.node != b.node) return a.node > b.node;
        return a.seq > b.seq;
    }
};

/// Deterministic single-threaded event loop driving the protocol over a
/// topology. Identical (config, seed) produce identical traces; the only
/// sanctioned parallelism is across independent runs.
class Engine {
  public:
    explicit Engine(const ScenarioConfig& cfg)
        : cfg_(cfg), topology_(build_topology(cfg.topology, cfg.seed)) {
        cfg_.validate();
        if (!is_connected(topology_)) {
            throw std::invalid_argument("scenario topology is not connected");
        }
        adj_ = adjacency_lists(topology_);
    }

    RunTrace run() {
        init_nodes();
        schedule_initial_events();
        const std::int64_t horizon_ns = to_ns_s(cfg_.sim_duration_s);
        std::int64_t processed = 0;

        while (!queue_.empty() && queue_.top().t_ns <= horizon_ns) {
            if (++processed > cfg_.max_events) {
                throw std::runtime_error("event budget exceeded (" +
                                         std::to_string(cfg_.max_events) +
                                         "); runaway forwarding or misconfigured duration");
            }
            const Event ev = queue_.top();
            queue_.pop();
            switch (ev.kind) {
            case EventKind::broadcast_timer: handle_broadcast(ev); break;
            case EventKind::packet_delivery: handle_delivery(ev); break;
            case EventKind::forward_transmit: handle_forward(ev); break;
            case EventKind::measurement_probe: handle_probe(ev); break;
            }
        }

        trace_.node_count = topology_.n;
        trace_.msg_origin = msg_origin_;
        trace_.msg_forwards = msg_forwards_;
        for (const auto& node : nodes_) trace_.dropped_malformed += node.dropped_malformed;
        trace_.convergence_time_s =
            detect_convergence(trace_.probes, cfg_.convergence_threshold_us,
                               cfg_.first_crossing_convergence);
        return trace_;
    }

    const Topology& topology() const { return topology_; }

  private:
    static std::int64_t to_ns_s(double seconds) {
        return static_cast<std::int64_t>(std::llround(seconds * 1e9));
    }
    static std::int64_t to_ns_us(double micros) {
        return static_cast<std::int64_t>(std::llround(micros * 1e3));
    }
    static double to_us(std::int64_t t_ns) { return static_cast<double>(t_ns) * 1e-3; }

    void init_nodes() {
        ProtocolParams params;
        params.rho_v = cfg_.rho_v;
        params.xi_us = cfg_.xi_us;
        params.d_fixed_us = cfg_.d_fixed_us;
        params.h_initial = cfg_.h_initial;
        params.broadcast_period_s = cfg_.broadcast_period_s;
        params.raw_local_error = cfg_.raw_local_error;

        nodes_.reserve(topology_.n);
        delay_streams_.reserve(topology_.n);
        loss_streams_.reserve(topology_.n);
        for (int i = 0; i < topology_.n; ++i) {
            auto drift_rng = make_stream(cfg_.seed, i, StreamPurpose::drift);
            auto boot_rng = make_stream(cfg_.seed, i, StreamPurpose::boot_offset);
            HardwareClock hw;
            hw.rate_ppm = std::uniform_real_distribution<double>(
                -cfg_.drift_ppm_bound, cfg_.drift_ppm_bound)(drift_rng);
            hw.boot_offset_us = std::uniform_real_distribution<double>(
                0.0, cfg_.boot_offset_max_s * 1e6)(boot_rng);
            NodeState node = make_node(i, hw, params);
            // Anchor the logical clock at the hardware value at t=0 so that
            // L(0) = H(0); the boot offset is the initial desynchronization.
            node.logical.anchor_hw_us = hw.read(0.0);
            node.logical.anchor_logical_us = static_cast<double>(node.logical.anchor_hw_us);
            nodes_.push_back(std::move(node));
            delay_streams_.push_back(make_stream(cfg_.seed, i, StreamPurpose::delay));
            loss_streams_.push_back(make_stream(cfg_.seed, i, StreamPurpose::loss));
            trace_.hop_changes.push_back({0.0, i, params.h_initial});
        }
    }

    void schedule_initial_events() {
        for (int i = 0; i < topology_.n; ++i) {
            auto phase_rng = make_stream(cfg_.seed, i, StreamPurpose::phase);
            const double phase_s = std::uniform_real_distribution<double>(
                0.0, cfg_.broadcast_period_s)(phase_rng);
            push_event({to_ns_s(phase_s), EventKind::broadcast_timer, i, 0});
        }
        const std::int64_t horizon_ns = to_ns_s(cfg_.sim_duration_s);
        const std::int64_t step_ns = to_ns_s(cfg_.measurement_interval_s);
        for (std::int64_t t = 0; t <= horizon_ns; t += step_ns) {
            push_event({t, EventKind::measurement_probe, 0, 0});
        }
    }

    void push_event(Event ev) {
        ev.seq = next_seq_++;
        queue_.push(std::move(ev));
    }

    void handle_broadcast(const Event& ev) {
        NodeState& node = nodes_[ev.node];
        const std::int64_t hw = node.hardware.read(to_us(ev.t_ns));
        if (controller_step(node, hw)) {
            trace_.hop_changes.push_back(
                {static_cast<double>(ev.t_ns) * 1e-9, ev.node, node.h_current});
        }
        const std::int64_t logical = node.logical.read(hw);
        const SyncMessage msg = make_broadcast(node, hw, logical);
        ++msg_origin_;
        transmit(ev.node, msg, ev.t_ns);
        push_event({ev.t_ns + to_ns_s(cfg_.broadcast_period_s), EventKind::broadcast_timer,
                    ev.node, 0});
    }

    void transmit(int sender, const SyncMessage& msg, std::int64_t t_ns) {
        for (const auto& [neighbor, weight] : adj_[sender]) {
            (void)weight;
            const double delay_us =
                sample_delay(delay_streams_[neighbor], cfg_.delay_mean_us, cfg_.delay_std_us);
            if (cfg_.loss_probability > 0.0) {
                std::uniform_real_distribution<double> unit(0.0, 1.0);
                if (unit(loss_streams_[neighbor]) < cfg_.loss_probability) continue;
            }
            Event ev{t_ns + to_ns_us(delay_us), EventKind::packet_delivery, neighbor, 0};
            ev.msg = msg;
            ev.delay_sample_us = delay_us;
            // Snapshot now: the receiver may re-anchor before delivery, and a
            // re-anchored clock cannot be read in its past.
            const NodeState& rx = nodes_[neighbor];
            ev.rx_reading_at_tx = rx.logical.read(rx.hardware.read(to_us(t_ns)));
            push_event(std::move(ev));
        }
    }

    void handle_delivery(const Event& ev) {
        NodeState& node = nodes_[ev.node];
        const std::int64_t hw_rx = node.hardware.read(to_us(ev.t_ns));
        const std::int64_t logical_rx = node.logical.read(hw_rx);

        if (ev.msg.hop_count == 0) track_offset_residual(ev, logical_rx);

        const ReceiveResult result = on_receive(node, ev.msg, hw_rx, logical_rx);
        if (result.forward) {
            Event fwd{ev.t_ns + to_ns_us(cfg_.forward_latency_us), EventKind::forward_transmit,
                      ev.node, 0};
            fwd.forward_hop = result.forward_hop;
            fwd.forward_origin = ev.msg.origin_id;
            fwd.forward_wave = ev.msg.wave;
            push_event(std::move(fwd));
        }
    }

    /// Offset-estimate residual identity: the estimate must differ from the
    /// true readout offset at the transmit instant by exactly the drawn delay
    /// minus the compensation, up to the two readout quantizations.
    void track_offset_residual(const Event& ev, std::int64_t logical_rx) {
        const double theta_hat = estimate_offset(logical_rx, ev.msg.logical_ts_us,
                                                 cfg_.d_fixed_us);
        const double theta_true =
            static_cast<double>(ev.rx_reading_at_tx - ev.msg.logical_ts_us);
        const double expected = ev.delay_sample_us - cfg_.d_fixed_us;
        const double dev = std::abs(theta_hat - theta_true - expected);
        trace_.max_offset_residual_dev_us = std::max(trace_.max_offset_residual_dev_us, dev);
    }

    void handle_forward(const Event& ev) {
        NodeState& node = nodes_[ev.node];
        const std::int64_t hw = node.hardware.read(to_us(ev.t_ns));
        const std::int64_t logical = node.logical.read(hw);
        const SyncMessage msg = make_forward(node, hw, logical, ev.forward_hop,
                                             ev.forward_origin, ev.forward_wave);
        ++msg_forwards_;
        transmit(ev.node, msg, ev.t_ns);
    }

    void handle_probe(const Event& ev) {
        std::vector<std::int64_t> readings(topology_.n);
        for (int i = 0; i < topology_.n; ++i) {
            readings[i] = nodes_[i].logical.read(nodes_[i].hardware.read(to_us(ev.t_ns)));
        }
        const ErrorSample s = measurement_probe(readings, topology_);
        ProbeRow row;
        row.time_s = static_cast<double>(ev.t_ns) * 1e-9;
        row.max_global_us = s.max_global_us;
        row.avg_global_us = s.avg_global_us;
        row.max_local_us = s.max_local_us;
        row.avg_local_us = s.avg_local_us;
        row.msg_total = msg_origin_ + msg_forwards_;
        row.msg_forwards = msg_forwards_;
        trace_.probes.push_back(row);
    }

    ScenarioConfig cfg_;
    Topology topology_;
    std::vector<std::vector<std::pair<int, double>>> adj_;
    std::vector<NodeState> nodes_;
    std::vector<std::mt19937_64> delay_streams_;
    std::vector<std::mt19937_64> loss_streams_;
    std::priority_queue<Event, std::vector<Event>, EventAfter> queue_;
    std::uint64_t next_seq_ = 0;
    std::int64_t msg_origin_ = 0;
    std::int64_t msg_forwards_ = 0;
    RunTrace trace_;
};

} // namespace detail

/// Run one scenario to completion and return its trace.
inline RunTrace run_scenario(const ScenarioConfig& cfg) {
    detail::Engine engine(cfg);
    return engine.run();
}

} // namespace macts
