#include "ddsim/channel.hpp"

#include "ddsim/detail/interp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

namespace ddsim {

cplx PathSet::shifted_gain(std::size_t i) const {
    const auto& p = paths.at(i);
    return p.gain * std::polar(1.0, 2.0 * kPi * p.doppler * p.delay);
}

double PathSet::normalized_doppler(std::size_t i, int M, int N, double symbol_period) const {
    return paths.at(i).doppler * M * N * symbol_period;
}

double PathSet::max_delay() const {
    double m = 0.0;
    for (const auto& p : paths) m = std::max(m, p.delay);
    return m;
}

double PathSet::total_power() const {
    double s = 0.0;
    for (const auto& p : paths) s += std::norm(p.gain);
    return s;
}

double max_doppler_hz(double speed_kmh, double carrier_hz) {
    return carrier_hz * (speed_kmh / 3.6) / kSpeedOfLight;
}

PathSet generate_channel(const ChannelConfig& cfg, double symbol_period, Rng& rng) {
    if (cfg.paths < 1) throw InvalidArgument("channel needs at least one path");
    if (cfg.speed_kmh < 0.0) throw InvalidArgument("speed must be nonnegative");
    if (!(cfg.frac_delay_max >= cfg.frac_delay_min)) {
        throw InvalidArgument("fractional delay range is empty");
    }

    std::vector<double> weights(static_cast<std::size_t>(cfg.paths));
    for (int i = 0; i < cfg.paths; ++i) weights[static_cast<std::size_t>(i)] = std::exp(-cfg.pdp_decay * i);
    const double wsum = std::accumulate(weights.begin(), weights.end(), 0.0);

    const double nu_max = max_doppler_hz(cfg.speed_kmh, cfg.carrier_hz);
    std::uniform_real_distribution<double> frac(cfg.frac_delay_min, cfg.frac_delay_max);
    std::uniform_real_distribution<double> angle(0.0, 2.0 * kPi);
    std::normal_distribution<double> normal(0.0, 1.0);

    PathSet ps;
    ps.paths.reserve(static_cast<std::size_t>(cfg.paths));
    for (int i = 0; i < cfg.paths; ++i) {
        // Fixed draw order per tap keeps realizations paired across modes.
        double a = frac(rng);
        const double re = normal(rng);
        const double im = normal(rng);
        const double theta = angle(rng);
        if (!cfg.fractional_delay) a = 0.0;
        if (i == 0) a = std::max(a, 0.0);
        const double sd = std::sqrt(weights[static_cast<std::size_t>(i)] / wsum / 2.0);
        Path p;
        p.gain = cplx(re * sd, im * sd);
        p.delay = (i + a) * symbol_period;
        p.doppler = nu_max * std::cos(theta);
        ps.paths.push_back(p);
    }
    return ps;
}

cplx Waveform::at(std::ptrdiff_t index) const {
    const auto k = index - first_index;
    if (k < 0 || k >= static_cast<std::ptrdiff_t>(samples.size())) return {};
    return samples[static_cast<std::size_t>(k)];
}

double Waveform::power() const {
    if (samples.empty()) return 0.0;
    double s = 0.0;
    for (const auto& v : samples) s += std::norm(v);
    return s / static_cast<double>(samples.size());
}

Waveform apply_channel_waveform(const Waveform& tx, const PathSet& paths) {
    if (tx.oversampling < 1) throw InvalidArgument("waveform oversampling must be >= 1");
    const double step = tx.fine_step();
    const double max_shift = paths.max_delay() / step;
    for (const auto& p : paths.paths) {
        if (p.delay < 0.0) throw InvalidArgument("path delays must be nonnegative");
    }

    Waveform rx;
    rx.oversampling = tx.oversampling;
    rx.symbol_period = tx.symbol_period;
    rx.first_index = tx.first_index;
    const auto len = static_cast<std::ptrdiff_t>(tx.samples.size()) +
                     static_cast<std::ptrdiff_t>(std::ceil(max_shift)) + 2;
    rx.samples.assign(static_cast<std::size_t>(len), cplx{});

    const auto n = static_cast<long>(tx.samples.size());
    for (const auto& p : paths.paths) {
        const double shift = p.delay / step;
        const double w = 2.0 * kPi * p.doppler * step;
        for (std::ptrdiff_t j = 0; j < len; ++j) {
            // tx position of output sample j, relative to tx.samples[0]
            const double pos = static_cast<double>(j) - shift;
            if (pos < -2.0 || pos > static_cast<double>(n + 1)) continue;
            const cplx x = detail::cubic_at(tx.samples, n, pos);
            if (x == cplx{}) continue;
            const double phase = w * static_cast<double>(rx.first_index + j);
            rx.samples[static_cast<std::size_t>(j)] += p.gain * x * std::polar(1.0, phase);
        }
    }
    return rx;
}

double noise_variance(double snr_db) {
    if (std::isinf(snr_db) && snr_db > 0) return 0.0;
    return std::pow(10.0, -snr_db / 10.0);
}

void add_awgn(CVector& signal, double snr_db, Rng& rng) {
    const double var = noise_variance(snr_db);
    if (var == 0.0) return;
    std::normal_distribution<double> normal(0.0, 1.0);
    const double sd = std::sqrt(var / 2.0);
    for (Eigen::Index i = 0; i < signal.size(); ++i) {
        const double re = normal(rng);
        const double im = normal(rng);
        signal[i] += cplx(re * sd, im * sd);
    }
}

SamplingOffset::SamplingOffset(double fraction) : fraction_(fraction) {
    if (!(fraction >= 0.0 && fraction < 0.5)) {
        throw InvalidArgument("fractional timing offset must lie in [0, 0.5)");
    }
}

SamplingOffset fractional_to(double fraction) { return SamplingOffset(fraction); }

}  // namespace ddsim
