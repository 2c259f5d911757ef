#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace macts {

/// Free-running hardware clock: H(t) = (1 + rate_ppm*1e-6) * t + boot_offset,
/// read out as an integer multiple of the tick granularity (1 us by default).
/// It can never be adjusted after boot; its timestamps are what the protocol
/// uses to estimate relative clock speed.
struct HardwareClock {
    double rate_ppm = 0.0;        ///< inherent drift relative to nominal
    double boot_offset_us = 0.0;  ///< value at true time zero (power-on offset)
    std::int64_t granularity_us = 1;

    /// Readout at true time `true_time_us`. Monotone in true time.
    std::int64_t read(double true_time_us) const {
        const double phase = phase_at(true_time_us);
        const double g = static_cast<double>(granularity_us);
        return static_cast<std::int64_t>(std::floor(phase / g)) * granularity_us;
    }

    /// Unquantized phase, for analysis code that needs the ideal value.
    double phase_at(double true_time_us) const {
        return (1.0 + rate_ppm * 1e-6) * true_time_us + boot_offset_us;
    }
};

/// Tunable logical clock layered on a hardware clock. It advances at `phi`
/// logical microseconds per hardware microsecond from a (hardware, logical)
/// anchor pair. The anchor keeps the real-valued phase so repeated updates do
/// not accumulate rounding error; only readouts are quantized.
struct LogicalClock {
    double phi = 1.0;
    std::int64_t anchor_hw_us = 0;
    double anchor_logical_us = 0.0;

    /// Integer readout at hardware time `hw_now_us`.
    std::int64_t read(std::int64_t hw_now_us) const {
        if (hw_now_us < anchor_hw_us) {
            throw std::logic_error(
                "logical clock read before its anchor: hardware time ran backwards");
        }
        return static_cast<std::int64_t>(std::floor(value_at(hw_now_us)));
    }

    /// Real-valued clock value at hardware time `hw_now_us`.
    double value_at(std::int64_t hw_now_us) const {
        return anchor_logical_us +
               phi * static_cast<double>(hw_now_us - anchor_hw_us);
    }

    /// Re-anchor at `hw_now_us`: jump the value by `correction_us` and advance
    /// at `new_phi` from here on. With correction 0 and unchanged phi this is
    /// a no-op on all future readings.
    void apply_update(std::int64_t hw_now_us, double new_phi, double correction_us) {
        if (!(new_phi > 0.0)) {
            throw std::invalid_argument("logical clock rate multiplier must be > 0");
        }
        anchor_logical_us = value_at(hw_now_us) + correction_us;
        anchor_hw_us = hw_now_us;
        phi = new_phi;
    }
};

} // namespace macts
