#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <vector>

#include "macts/clock.hpp"

namespace macts {

/// Broadcast packet. Timestamps and rate multiplier always belong to the
/// immediate transmitter: a forwarder re-stamps the packet with its own
/// clocks after applying its own update, so hop-level error accumulates per
/// forwarding step instead of tunneling the origin's timestamps end to end.
/// (origin_id, wave) identify the origin broadcast that triggered this
/// packet, used only to suppress duplicate forwards of multi-path copies.
struct SyncMessage {
    std::int64_t hw_ts_us = 0;       ///< transmitter hardware timestamp
    std::int64_t logical_ts_us = 0;  ///< transmitter logical timestamp
    double phi = 1.0;                ///< transmitter rate multiplier
    int hop_count = 0;               ///< 0 for an origin broadcast
    int sender_id = -1;              ///< immediate transmitter
    int origin_id = -1;
    std::int64_t wave = 0;           ///< origin-local broadcast sequence
};

/// Per-transmitter estimation state held by a receiver.
struct NeighborRecord {
    bool has_pair = false;
    std::int64_t hw_rx_old = 0;  ///< receiver hardware stamp of the previous pair
    std::int64_t hw_tx_old = 0;  ///< transmitter hardware stamp of the previous pair
    double rate_estimate = 1.0;  ///< transmitter hardware rate over receiver's
    bool has_error = false;
    double last_local_error_us = 0.0;  ///< latest |offset estimate| for the controller
    std::int64_t last_heard_hw_us = 0;
};

struct ProtocolParams {
    double rho_v = 0.5;       ///< averaging factor for the rate multiplier
    double xi_us = 5.0;       ///< local convergence threshold for the hop controller
    double d_fixed_us = 3.33; ///< fixed-delay compensation subtracted from offsets
    int h_initial = 2;        ///< configured maximum hop depth
    double broadcast_period_s = 30.0;
    bool raw_local_error = false; ///< controller input |L_rx - L_tx| instead of |offset est|

    void validate() const {
        if (!(rho_v > 0.0 && rho_v < 1.0))
            throw std::invalid_argument("rho_v must lie in (0,1)");
        if (h_initial < 1) throw std::invalid_argument("h_initial must be >= 1");
        if (!(xi_us > 0.0)) throw std::invalid_argument("xi_us must be > 0");
        if (!(broadcast_period_s > 0.0))
            throw std::invalid_argument("broadcast period must be > 0");
    }
};

struct NodeState {
    int node_id = -1;
    HardwareClock hardware;
    LogicalClock logical;
    ProtocolParams params;
    int h_current = 1;
    std::map<int, NeighborRecord> neighbors;
    /// last wave sequence forwarded, per origin (waves arrive in order)
    std::map<int, std::int64_t> forwarded_waves;
    std::int64_t next_wave = 0;
    std::int64_t dropped_malformed = 0;
};

inline NodeState make_node(int id, const HardwareClock& hw, const ProtocolParams& params) {
    params.validate();
    NodeState s;
    s.node_id = id;
    s.hardware = hw;
    s.params = params;
    s.h_current = params.h_initial;
    return s;
}

/// Relative hardware rate of the transmitter with respect to the receiver,
/// from two timestamp pairs of the same transmitter:
/// (hw_tx_new - hw_tx_old) / (hw_rx_new - hw_rx_old). Multiplied into the
/// transmitter's rate multiplier this converts its logical rate into the
/// receiver's hardware units. The first pair from a transmitter is only
/// stored; degenerate pairs (duplicated or reordered packets) are discarded
/// and leave both the estimate and the stored pair unchanged.
inline double estimate_skew(NeighborRecord& rec, std::int64_t hw_rx_us, std::int64_t hw_tx_us) {
    if (!rec.has_pair) {
        rec.has_pair = true;
        rec.hw_rx_old = hw_rx_us;
        rec.hw_tx_old = hw_tx_us;
        return rec.rate_estimate;
    }
    const double d_rx = static_cast<double>(hw_rx_us - rec.hw_rx_old);
    const double d_tx = static_cast<double>(hw_tx_us - rec.hw_tx_old);
    if (d_rx <= 0.0 || d_tx <= 0.0) return rec.rate_estimate;
    rec.rate_estimate = d_tx / d_rx;
    rec.hw_rx_old = hw_rx_us;
    rec.hw_tx_old = hw_tx_us;
    return rec.rate_estimate;
}

/// One-way offset estimate receiver-minus-transmitter with fixed-delay
/// compensation: logical_rx - logical_tx - d_fixed. The residual against the
/// true offset is exactly the packet's delay minus the compensation.
inline double estimate_offset(std::int64_t logical_rx_us, std::int64_t logical_tx_us,
                              double d_fixed_us) {
    return static_cast<double>(logical_rx_us - logical_tx_us) - d_fixed_us;
}

/// Convex averaging step pulling the receiver's rate multiplier toward the
/// transmitter's, expressed in the receiver's hardware units:
/// rho * phi_i + (1 - rho) * (rate_estimate * phi_j).
inline double update_rate_multiplier(double phi_i, double rate_estimate, double phi_j,
                                     double rho_v) {
    if (!(phi_i > 0.0 && rate_estimate > 0.0 && phi_j > 0.0))
        throw std::invalid_argument("rate multiplier inputs must be > 0");
    if (!(rho_v > 0.0 && rho_v < 1.0)) throw std::invalid_argument("rho_v must lie in (0,1)");
    return rho_v * phi_i + (1.0 - rho_v) * (rate_estimate * phi_j);
}

/// Origin broadcast, stamped with the node's current clocks.
inline SyncMessage make_broadcast(NodeState& state, std::int64_t hw_now_us,
                                  std::int64_t logical_now_us) {
    SyncMessage msg;
    msg.hw_ts_us = hw_now_us;
    msg.logical_ts_us = logical_now_us;
    msg.phi = state.logical.phi;
    msg.hop_count = 0;
    msg.sender_id = state.node_id;
    msg.origin_id = state.node_id;
    msg.wave = state.next_wave++;
    return msg;
}

/// Forward of a received wave, re-stamped with the forwarder's clocks.
inline SyncMessage make_forward(const NodeState& state, std::int64_t hw_now_us,
                                std::int64_t logical_now_us, int hop_count, int origin_id,
                                std::int64_t wave) {
    SyncMessage msg;
    msg.hw_ts_us = hw_now_us;
    msg.logical_ts_us = logical_now_us;
    msg.phi = state.logical.phi;
    msg.hop_count = hop_count;
    msg.sender_id = state.node_id;
    msg.origin_id = origin_id;
    msg.wave = wave;
    return msg;
}

struct ReceiveResult {
    bool accepted = false;
    double offset_estimate_us = 0.0;
    bool forward = false;
    int forward_hop = 0;
};

/// Receive handler. Updates the per-transmitter record, averages the rate
/// multiplier, applies half the offset estimate as a correction toward the
/// transmitter, and decides whether this wave still has hops to travel.
///
/// Skew pairs are taken from origin (hop 0) packets only: those are spaced a
/// full broadcast period apart, so readout quantization contributes ~2/B ppm
/// to the rate estimate. Forwarded packets arrive at arbitrary sub-second
/// spacings where the same quantization would swamp the estimate, so they
/// contribute offset averaging only.
inline ReceiveResult on_receive(NodeState& state, const SyncMessage& msg,
                                std::int64_t hw_rx_us, std::int64_t logical_rx_us) {
    ReceiveResult result;
    if (msg.hop_count < 0 || msg.hop_count > state.params.h_initial) {
        ++state.dropped_malformed;
        return result;
    }

    NeighborRecord& rec = state.neighbors[msg.sender_id];
    if (msg.hop_count == 0) estimate_skew(rec, hw_rx_us, msg.hw_ts_us);

    const double theta_hat =
        estimate_offset(logical_rx_us, msg.logical_ts_us, state.params.d_fixed_us);
    const double new_phi = update_rate_multiplier(state.logical.phi, rec.rate_estimate,
                                                  msg.phi, state.params.rho_v);
    // Averaging step: move halfway toward the transmitter's compensated time.
    state.logical.apply_update(hw_rx_us, new_phi, -theta_hat / 2.0);

    rec.last_local_error_us =
        state.params.raw_local_error
            ? std::abs(static_cast<double>(logical_rx_us - msg.logical_ts_us))
            : std::abs(theta_hat);
    rec.has_error = true;
    rec.last_heard_hw_us = hw_rx_us;

    result.accepted = true;
    result.offset_estimate_us = theta_hat;

    const int next_hop = msg.hop_count + 1;
    if (next_hop < state.h_current && msg.origin_id != state.node_id) {
        auto [it, first_time] = state.forwarded_waves.try_emplace(msg.origin_id, msg.wave);
        if (first_time || it->second < msg.wave) {
            it->second = msg.wave;
            result.forward = true;
            result.forward_hop = next_hop;
        }
    }
    return result;
}

/// Hop controller, evaluated once per local broadcast period: if every
/// recently heard transmitter's last local error is under xi the hop depth
/// steps down (toward plain single-hop operation), otherwise it steps back up
/// toward the configured maximum. Transmitters not heard for two periods are
/// ignored; no fresh data counts as not converged. Returns true if the depth
/// changed.
inline bool controller_step(NodeState& state, std::int64_t hw_now_us) {
    const double window_us = 2.0 * state.params.broadcast_period_s * 1e6;
    bool any_fresh = false;
    bool all_converged = true;
    for (const auto& [id, rec] : state.neighbors) {
        if (!rec.has_error) continue;
        if (static_cast<double>(hw_now_us - rec.last_heard_hw_us) > window_us) continue;
        any_fresh = true;
        if (rec.last_local_error_us >= state.params.xi_us) {
            all_converged = false;
            break;
        }
    }
    const int before = state.h_current;
    if (any_fresh && all_converged) {
        state.h_current = std::max(1, state.h_current - 1);
    } else {
        state.h_current = std::min(state.params.h_initial, state.h_current + 1);
    }
    return state.h_current != before;
}

/// Worst-case error gathered along a k-hop forwarding path: per-hop delay
/// residuals plus the rate-estimate error (ppm) integrated over the
/// forwarding latency at each relay.
inline double by_hop_error_bound(int k, const std::vector<double>& delay_residuals_us,
                                 const std::vector<double>& skew_errors_ppm,
                                 double forward_latency_us) {
    if (k < 1) throw std::invalid_argument("hop count must be >= 1");
    if (static_cast<int>(delay_residuals_us.size()) != k ||
        static_cast<int>(skew_errors_ppm.size()) != k) {
        throw std::invalid_argument("sample lists must have length k");
    }
    double total = 0.0;
    for (int h = 0; h < k; ++h) {
        total += delay_residuals_us[h];
        total += std::abs(skew_errors_ppm[h]) * forward_latency_us / 1e6;
    }
    return total;
}

} // namespace macts
