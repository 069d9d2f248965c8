#pragma once

#include <array>
#include <cmath>
#include <type_traits>

namespace ddsim::detail {

/// Weights of 4-point cubic Lagrange interpolation on nodes -1, 0, 1, 2 for
/// a fractional position f in [0, 1).
inline std::array<double, 4> cubic_weights(double f) {
    return {
        -f * (f - 1.0) * (f - 2.0) / 6.0,
        (f + 1.0) * (f - 1.0) * (f - 2.0) / 2.0,
        -(f + 1.0) * f * (f - 2.0) / 2.0,
        (f + 1.0) * f * (f - 1.0) / 6.0,
    };
}

/// Interpolates a sequence at real position `pos` (in samples); samples
/// outside [0, n) read as zero.
template <class Seq>
auto cubic_at(const Seq& seq, long n, double pos) -> std::decay_t<decltype(seq[0])> {
    using T = std::decay_t<decltype(seq[0])>;
    const double base = std::floor(pos);
    const long i = static_cast<long>(base);
    const double f = pos - base;
    auto at = [&](long k) -> T { return (k >= 0 && k < n) ? seq[k] : T{}; };
    if (f == 0.0) return at(i);
    const auto w = cubic_weights(f);
    return w[0] * at(i - 1) + w[1] * at(i) + w[2] * at(i + 1) + w[3] * at(i + 2);
}

}  // namespace ddsim::detail
