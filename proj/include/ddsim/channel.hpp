#pragma once

// Sparse doubly-selective channel: path generation, waveform-level
// application, AWGN and fractional timing offsets.

#include "ddsim/types.hpp"

#include <cstddef>
#include <vector>

namespace ddsim {

struct Path {
    cplx gain{1.0, 0.0};
    double delay = 0.0;     // seconds, >= 0
    double doppler = 0.0;   // Hz
};

struct PathSet {
    std::vector<Path> paths;

    std::size_t size() const { return paths.size(); }
    /// h_i' = h_i exp(j 2 pi nu_i tau_i)
    cplx shifted_gain(std::size_t i) const;
    /// Doppler of path i in units of the Doppler resolution 1/(M N T_s).
    double normalized_doppler(std::size_t i, int M, int N, double symbol_period) const;
    double max_delay() const;
    double total_power() const;
};

struct ChannelConfig {
    int paths = 6;
    double pdp_decay = 1.0;          // natural-log power decay per tap
    double speed_kmh = 500.0;
    double carrier_hz = 5.9e9;
    bool fractional_delay = true;
    double frac_delay_min = -0.5;    // in T_s
    double frac_delay_max = 0.5;
};

double max_doppler_hz(double speed_kmh, double carrier_hz);

/// Tap i gets delay (i + a_i) T_s with a_i ~ U[frac_min, frac_max] (a_0
/// clamped at 0), gain ~ CN(0, w_i) with an exponential profile normalized to
/// unit total average power, and Doppler nu_max cos(theta_i). The RNG stream is
/// consumed identically for every speed and delay mode.
PathSet generate_channel(const ChannelConfig& cfg, double symbol_period, Rng& rng);

/// Complex baseband waveform on the fine grid: sample j sits at time
/// (first_index + j) * T_s / Q, with t = 0 at the first post-prefix symbol.
struct Waveform {
    std::vector<cplx> samples;
    int oversampling = 1;
    std::ptrdiff_t first_index = 0;
    double symbol_period = 1.0;

    double fine_step() const { return symbol_period / oversampling; }
    std::ptrdiff_t end_index() const { return first_index + static_cast<std::ptrdiff_t>(samples.size()); }
    /// Sample at absolute fine index (zero outside the stored range).
    cplx at(std::ptrdiff_t index) const;
    double power() const;
};

/// r(t) = sum_i h_i x(t - tau_i) exp(j 2 pi nu_i t); delays are realized as an
/// integer fine-grid shift plus cubic interpolation of the remainder.
Waveform apply_channel_waveform(const Waveform& tx, const PathSet& paths);

/// Noise variance for a given Es/N0 at the matched-filter output (unit Es).
double noise_variance(double snr_db);

/// Adds CN(0, 10^(-snr_db/10)) noise; +inf leaves the signal untouched.
void add_awgn(CVector& signal, double snr_db, Rng& rng);

/// Residual fractional timing offset: matched-filter samples are taken at
/// (l + fraction) T_s.
class SamplingOffset {
public:
    SamplingOffset() = default;
    explicit SamplingOffset(double fraction);
    double fraction() const { return fraction_; }

private:
    double fraction_ = 0.0;
};

SamplingOffset fractional_to(double fraction);

}  // namespace ddsim
