#include "ddsim/modem.hpp"

#include "ddsim/detail/interp.hpp"

#include <algorithm>
#include <cmath>

namespace ddsim {

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;

void check_pulse(const ModemConfig& cfg, const PulsePrototype& pulse) {
    if (pulse.samples.size() != static_cast<std::size_t>(2 * pulse.span * pulse.oversampling + 1)) {
        throw InvalidArgument("pulse prototype has inconsistent sample count");
    }
    if (std::abs(pulse.symbol_period - cfg.symbol_period()) > 1e-9 * cfg.symbol_period()) {
        throw InvalidArgument("pulse symbol period does not match the modem");
    }
}

// Matched-filter output at absolute fine index i: sum_j r[j] p[j - i] * T_s/Q.
cplx mf_at(const Waveform& rx, const std::vector<double>& p, int half, std::ptrdiff_t i) {
    const std::ptrdiff_t lo = std::max(i - half, rx.first_index);
    const std::ptrdiff_t hi = std::min(i + half, rx.end_index() - 1);
    cplx acc{};
    for (std::ptrdiff_t j = lo; j <= hi; ++j) {
        acc += rx.samples[static_cast<std::size_t>(j - rx.first_index)] *
               p[static_cast<std::size_t>(j - i + half)];
    }
    return acc * rx.fine_step();
}

}  // namespace

void ModemConfig::validate() const {
    if (M < 1 || N < 1) throw InvalidArgument("grid dimensions must be positive");
    if (!(subcarrier_spacing > 0.0)) throw InvalidArgument("subcarrier spacing must be positive");
    if (cp_len < 0 || cp_len > M * N) throw InvalidArgument("cyclic prefix length out of range");
    if (rx_lead < 0 || rx_lead > cp_len) throw InvalidArgument("receive lead must lie in [0, cp_len]");
}

cplx qam4(std::uint8_t b1, std::uint8_t b0) {
    return {(1.0 - 2.0 * (b1 & 1)) * kInvSqrt2, (1.0 - 2.0 * (b0 & 1)) * kInvSqrt2};
}

DDFrame map_bits(const Bits& bits, int M, int N) { return map_bits(bits, FrameMask(M, N, true)); }

DDFrame map_bits(const Bits& bits, const FrameMask& mask) {
    const auto idx = mask.indices();
    if (bits.size() != 2 * idx.size()) throw InvalidArgument("bit count does not match the data mask");
    CVector d = CVector::Zero(static_cast<Eigen::Index>(mask.M()) * mask.N());
    for (std::size_t k = 0; k < idx.size(); ++k) d[idx[k]] = qam4(bits[2 * k], bits[2 * k + 1]);
    return DDFrame::from_vec(d, mask.M(), mask.N());
}

Bits demap(const CVector& symbols) {
    Bits out(2 * static_cast<std::size_t>(symbols.size()));
    for (Eigen::Index k = 0; k < symbols.size(); ++k) {
        out[2 * static_cast<std::size_t>(k)] = symbols[k].real() < 0.0 ? 1 : 0;
        out[2 * static_cast<std::size_t>(k) + 1] = symbols[k].imag() < 0.0 ? 1 : 0;
    }
    return out;
}

Bits demap(const DDFrame& frame, const FrameMask& mask) {
    if (frame.M() != mask.M() || frame.N() != mask.N()) throw InvalidArgument("mask does not match frame");
    const auto idx = mask.indices();
    const CVector d = frame.vec();
    CVector sel(static_cast<Eigen::Index>(idx.size()));
    for (std::size_t k = 0; k < idx.size(); ++k) sel[static_cast<Eigen::Index>(k)] = d[idx[k]];
    return demap(sel);
}

Bits random_bits(std::size_t count, Rng& rng) {
    Bits out(count);
    std::uint64_t word = 0;
    for (std::size_t k = 0; k < count; ++k) {
        if (k % 64 == 0) word = rng();
        out[k] = static_cast<std::uint8_t>((word >> (k % 64)) & 1U);
    }
    return out;
}

Waveform transmit(const DDFrame& frame, const ModemConfig& cfg, const PulsePrototype& pulse) {
    cfg.validate();
    if (frame.M() != cfg.M || frame.N() != cfg.N) throw InvalidArgument("frame does not match modem grid");
    check_pulse(cfg, pulse);

    const TimeSignal s = add_cp(idzt(frame), cfg.cp_len);
    const int Q = pulse.oversampling;
    const int half = pulse.centre_index();
    const auto L = static_cast<std::ptrdiff_t>(s.samples.size());

    Waveform w;
    w.oversampling = Q;
    w.symbol_period = pulse.symbol_period;
    w.first_index = -static_cast<std::ptrdiff_t>(cfg.cp_len) * Q - half;
    w.samples.assign(static_cast<std::size_t>((L - 1) * Q + 2 * half + 1), cplx{});
    for (std::ptrdiff_t k = 0; k < L; ++k) {
        const cplx a = s.samples[k];
        if (a == cplx{}) continue;
        cplx* out = w.samples.data() + k * Q;
        for (std::size_t j = 0; j < pulse.samples.size(); ++j) out[j] += a * pulse.samples[j];
    }
    return w;
}

CVector receive_samples(const Waveform& rx, const ModemConfig& cfg, const PulsePrototype& pulse,
                        SamplingOffset offset) {
    cfg.validate();
    check_pulse(cfg, pulse);
    if (rx.oversampling != pulse.oversampling) throw InvalidArgument("waveform and pulse oversampling differ");
    const int Q = pulse.oversampling;
    const int MN = cfg.frame_size();
    const int half = pulse.centre_index();
    if (rx.end_index() <= static_cast<std::ptrdiff_t>(MN - cfg.rx_lead - 1) * Q) {
        throw InvalidArgument("received waveform is shorter than one frame");
    }

    const double shift = offset.fraction() * Q;
    const double base = std::floor(shift);
    const auto ib = static_cast<std::ptrdiff_t>(base);
    const double frac = shift - base;
    const auto w = detail::cubic_weights(frac);

    CVector y(MN);
    for (int l = -cfg.rx_lead; l < MN - cfg.rx_lead; ++l) {
        const std::ptrdiff_t i0 = static_cast<std::ptrdiff_t>(l) * Q + ib;
        cplx v;
        if (frac == 0.0) {
            v = mf_at(rx, pulse.samples, half, i0);
        } else {
            v = w[0] * mf_at(rx, pulse.samples, half, i0 - 1) + w[1] * mf_at(rx, pulse.samples, half, i0) +
                w[2] * mf_at(rx, pulse.samples, half, i0 + 1) + w[3] * mf_at(rx, pulse.samples, half, i0 + 2);
        }
        y[(l + MN) % MN] = v;
    }
    return y;
}

DDFrame receive(const Waveform& rx, const ModemConfig& cfg, const PulsePrototype& pulse,
                SamplingOffset offset) {
    TimeSignal t{receive_samples(rx, cfg, pulse, offset), 0};
    return dzt(t, cfg.M, cfg.N);
}

}  // namespace ddsim
