#pragma once

// Transmit and receive chains: bits -> 4-QAM -> DD frame -> IDZT -> CP ->
// pulse-shaped fine-grid waveform, and matched filter -> offset sampling ->
// CP removal -> DZT.

#include "ddsim/channel.hpp"
#include "ddsim/grid_zak.hpp"
#include "ddsim/pulse.hpp"

#include <cstdint>
#include <vector>

namespace ddsim {

struct ModemConfig {
    int M = 32;
    int N = 16;
    double subcarrier_spacing = 15e3;   // Hz
    double carrier_hz = 5.9e9;
    int cp_len = 16;
    /// Number of cyclic-prefix samples the receive window starts early. The
    /// window covers l in [-rx_lead, MN - rx_lead) and is rotated back by
    /// rx_lead, so anticausal matched-filter tails stay inside the window.
    int rx_lead = 0;

    double symbol_period() const { return 1.0 / (M * subcarrier_spacing); }
    double doppler_resolution() const { return 1.0 / (M * N * symbol_period()); }
    int frame_size() const { return M * N; }
    void validate() const;
};

using Bits = std::vector<std::uint8_t>;

/// Gray 4-QAM: (b1, b0) -> ((1 - 2 b1) + j (1 - 2 b0)) / sqrt(2).
cplx qam4(std::uint8_t b1, std::uint8_t b0);

/// Fills every cell of an M x N frame (2 M N bits).
DDFrame map_bits(const Bits& bits, int M, int N);
/// Fills only the masked cells, in vec order (2 * mask.count() bits).
DDFrame map_bits(const Bits& bits, const FrameMask& mask);

/// Hard minimum-distance decisions on the masked cells, in vec order.
Bits demap(const DDFrame& frame, const FrameMask& mask);
Bits demap(const CVector& symbols);

Bits random_bits(std::size_t count, Rng& rng);

/// Pulse-shaped transmit waveform. Sample kappa of the prefixed sequence is
/// centred at fine index (kappa - cp_len) * Q.
Waveform transmit(const DDFrame& frame, const ModemConfig& cfg, const PulsePrototype& pulse);

/// Matched filter, sampling at (l + delta) T_s over the receive window and
/// rotation into the post-prefix frame order. Returns the length-MN
/// delay-time sequence.
CVector receive_samples(const Waveform& rx, const ModemConfig& cfg, const PulsePrototype& pulse,
                        SamplingOffset offset = {});

DDFrame receive(const Waveform& rx, const ModemConfig& cfg, const PulsePrototype& pulse,
                SamplingOffset offset = {});

}  // namespace ddsim
