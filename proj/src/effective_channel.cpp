#include "ddsim/effective_channel.hpp"

#include <cmath>

namespace ddsim {

namespace {

void check_components(const std::vector<ChannelComponent>& comps, int M, int N) {
    if (M < 1 || N < 1) throw InvalidArgument("grid dimensions must be positive");
    const Eigen::Index MN = static_cast<Eigen::Index>(M) * N;
    for (const auto& c : comps) {
        if (c.u.size() != MN || c.g.size() != MN) {
            throw InvalidArgument("channel component length does not match M*N");
        }
    }
}

void check_finite(const CMatrix& H) {
    if (!H.allFinite()) throw NumericalError("effective channel contains non-finite entries");
}

}  // namespace

CVector periodized_response(const EffectivePulse& g, double tau, int MN) {
    if (MN < 1) throw InvalidArgument("sequence length must be positive");
    const double Ts = g.symbol_period();
    const double x0 = tau / Ts;
    const double reach = g.half_support();
    CVector out = CVector::Zero(MN);
    // Contributing arguments k + r*MN - x0 lie in [-reach, reach].
    const auto first = static_cast<long>(std::ceil(x0 - reach));
    const auto last = static_cast<long>(std::floor(x0 + reach));
    for (long j = first; j <= last; ++j) {
        const long k = ((j % MN) + MN) % MN;
        out[k] += g.at_symbols(static_cast<double>(j) - x0);
    }
    return out;
}

std::vector<ChannelComponent> path_components(const PathSet& ps, const EffectivePulse& g, int M, int N) {
    const int MN = M * N;
    const double Ts = g.symbol_period();
    std::vector<ChannelComponent> comps;
    comps.reserve(ps.size());
    for (std::size_t i = 0; i < ps.size(); ++i) {
        const auto& p = ps.paths[i];
        ChannelComponent c;
        c.gain = ps.shifted_gain(i);
        c.u.resize(MN);
        for (int k = 0; k < MN; ++k) c.u[k] = std::polar(1.0, 2.0 * kPi * p.doppler * k * Ts);
        c.g = periodized_response(g, p.delay, MN);
        comps.push_back(std::move(c));
    }
    return comps;
}

CMatrix assemble_elementwise(const std::vector<ChannelComponent>& comps, int M, int N) {
    check_components(comps, M, N);
    const int MN = M * N;
    CMatrix H = CMatrix::Zero(MN, MN);
    std::vector<cplx> wrap(static_cast<std::size_t>(N));
    for (int n = 0; n < N; ++n) wrap[static_cast<std::size_t>(n)] = std::polar(1.0, -2.0 * kPi * n / N);

    for (const auto& c : comps) {
        const CMatrix Uz = dzt_sequence(c.u, M, N);
        const CMatrix Gz = dzt_sequence(c.g, M, N);
        for (int k = 0; k < N; ++k) {
            for (int l = 0; l < M; ++l) {
                const int col = k * M + l;
                for (int n = 0; n < N; ++n) {
                    const cplx a = c.gain * Uz(l, ((n - k) % N + N) % N);
                    for (int m = 0; m < M; ++m) {
                        cplx v = a * Gz(((m - l) % M + M) % M, n);
                        if (m < l) v *= wrap[static_cast<std::size_t>(n)];
                        H(n * M + m, col) += v;
                    }
                }
            }
        }
    }
    check_finite(H);
    return H;
}

CMatrix assemble_block_form(const std::vector<ChannelComponent>& comps, int M, int N) {
    check_components(comps, M, N);
    const int MN = M * N;
    CMatrix H = CMatrix::Zero(MN, MN);
    for (const auto& c : comps) {
        const CMatrix Uz = dzt_sequence(c.u, M, N);
        const CMatrix Gz = dzt_sequence(c.g, M, N);

        std::vector<CMatrix> G(static_cast<std::size_t>(N));
        for (int n = 0; n < N; ++n) {
            CMatrix E = CMatrix::Ones(M, M);
            E.triangularView<Eigen::StrictlyUpper>().setConstant(std::polar(1.0, -2.0 * kPi * n / N));
            CMatrix C(M, M);
            for (int m = 0; m < M; ++m) {
                for (int l = 0; l < M; ++l) C(m, l) = Gz(((m - l) % M + M) % M, n);
            }
            G[static_cast<std::size_t>(n)] = C.cwiseProduct(E);
        }
        std::vector<CMatrix> U(static_cast<std::size_t>(N));
        for (int p = 0; p < N; ++p) {
            U[static_cast<std::size_t>(p)] = CVector::Ones(M) * Uz.col(p).transpose();
        }
        for (int n = 0; n < N; ++n) {
            for (int k = 0; k < N; ++k) {
                const auto& Up = U[static_cast<std::size_t>(((n - k) % N + N) % N)];
                H.block(n * M, k * M, M, M) += c.gain * Up.cwiseProduct(G[static_cast<std::size_t>(n)]);
            }
        }
    }
    check_finite(H);
    return H;
}

EffectiveChannelMatrix build_effective_channel(const PathSet& ps, const EffectivePulse& g, int M, int N) {
    EffectiveChannelMatrix out;
    out.M = M;
    out.N = N;
    out.pulse_label = g.label();
    out.paths = ps;
    out.H = assemble_elementwise(path_components(ps, g, M, N), M, N);
    return out;
}

CVector apply_dd(const EffectiveChannelMatrix& Hm, const CVector& d) {
    if (d.size() != Hm.H.cols()) throw InvalidArgument("input length does not match the channel matrix");
    return Hm.H * d;
}

CMatrix impulse_response(const EffectiveChannelMatrix& Hm, int l, int k) {
    if (l < 0 || l >= Hm.M || k < 0 || k >= Hm.N) throw InvalidArgument("impulse bin outside the grid");
    const CVector col = Hm.H.col(k * Hm.M + l);
    return Eigen::Map<const CMatrix>(col.data(), Hm.M, Hm.N);
}

}  // namespace ddsim
