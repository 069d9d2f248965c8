#include "ddsim/effective_channel.hpp"

#include "doctest.h"

#include <cmath>
#include <random>

using namespace ddsim;

namespace {

// Direct Zak pair, independent of the library transforms.
CMatrix zak(const CVector& x, int M, int N) {
    CMatrix D = CMatrix::Zero(M, N);
    for (int m = 0; m < M; ++m)
        for (int n = 0; n < N; ++n)
            for (int q = 0; q < N; ++q) D(m, n) += x[q * M + m] * std::polar(1.0 / std::sqrt(N), -2 * kPi * n * q / N);
    return D;
}

CVector izak(const CVector& d, int M, int N) {
    CVector s = CVector::Zero(M * N);
    for (int m = 0; m < M; ++m)
        for (int q = 0; q < N; ++q)
            for (int k = 0; k < N; ++k) s[q * M + m] += d[k * M + m] * std::polar(1.0 / std::sqrt(N), 2 * kPi * k * q / N);
    return s;
}

// z = DZT( sum_i a_i (s .* u_i) (*) g_i ) with u, g evaluated from the path
// parameters and the pulse closed form.
CVector time_route(const PathSet& ps, double rolloff, const CVector& d, int M, int N, double Ts) {
    const int MN = M * N;
    const CVector s = izak(d, M, N);
    CVector y = CVector::Zero(MN);
    for (const auto& p : ps.paths) {
        const cplx a = p.gain * std::polar(1.0, 2 * kPi * p.doppler * p.delay);
        CVector g = CVector::Zero(MN);
        for (int j = -40 * MN; j <= 40 * MN; ++j) {
            const double x = j - p.delay / Ts;
            if (std::abs(x) <= 32.0) g[((j % MN) + MN) % MN] += rc_value(x * Ts, rolloff, Ts);
        }
        for (int l = 0; l < MN; ++l)
            for (int k = 0; k < MN; ++k)
                y[l] += a * s[k] * std::polar(1.0, 2 * kPi * p.doppler * k * Ts) * g[((l - k) % MN + MN) % MN];
    }
    const CMatrix Z = zak(y, M, N);
    return Eigen::Map<const CVector>(Z.data(), MN);
}

PathSet random_paths(int count, int M, int N, double Ts, Rng& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::normal_distribution<double> n01;
    PathSet ps;
    for (int i = 0; i < count; ++i) {
        Path p;
        p.gain = cplx(n01(rng), n01(rng));
        p.delay = std::max(0.0, i + u(rng) - 0.5) * Ts;
        p.doppler = (u(rng) - 0.5) * 6.0 / (M * N * Ts);
        ps.paths.push_back(p);
    }
    return ps;
}

CVector random_vector(int n, Rng& rng) {
    std::normal_distribution<double> n01;
    CVector v(n);
    for (int i = 0; i < n; ++i) v[i] = cplx(n01(rng), n01(rng));
    return v;
}

}  // namespace

TEST_CASE("dzt_sequence properties") {
    const CMatrix D = dzt_sequence(CVector::Ones(32), 8, 4);
    CHECK(D.col(0).cwiseAbs().minCoeff() > 1.0);
    CHECK(D.rightCols(3).norm() < 1e-14);
    Rng rng(1);
    const CVector x = random_vector(32, rng);
    CHECK(dzt_sequence(x, 8, 4).squaredNorm() == doctest::Approx(x.squaredNorm()).epsilon(1e-12));
    CHECK((dzt_sequence(x, 8, 4) - zak(x, 8, 4)).norm() < 1e-12);
}

TEST_CASE("identity channel") {
    const double Ts = 1.0;
    const EffectivePulse g = rc_effective_pulse(0.22, 64, 16, Ts);
    PathSet ps;
    ps.paths.push_back({1.0, 0.0, 0.0});
    const EffectiveChannelMatrix Hm = build_effective_channel(ps, g, 8, 4);
    CHECK((Hm.H - CMatrix::Identity(32, 32)).cwiseAbs().maxCoeff() < 1e-6);
    Rng rng(2);
    const CVector d = random_vector(32, rng);
    CHECK((apply_dd(Hm, d) - d).norm() < 1e-5);
}

TEST_CASE("integer delay and Doppler give a twisted shift") {
    const int M = 4, N = 4, MN = 16;
    const double Ts = 1.0;
    const EffectivePulse g = rc_effective_pulse(0.22, 64, 16, Ts);
    for (int l0 = 0; l0 < M; ++l0) {
        for (int k0 = -1; k0 < N; ++k0) {
            PathSet ps;
            ps.paths.push_back({1.0, l0 * Ts, static_cast<double>(k0) / (MN * Ts)});
            const EffectiveChannelMatrix Hm = build_effective_channel(ps, g, M, N);
            for (int k = 0; k < N; ++k) {
                for (int l = 0; l < M; ++l) {
                    const CMatrix R = impulse_response(Hm, l, k);
                    const int mm = (l + l0) % M;
                    const int nn = ((k + k0) % N + N) % N;
                    CHECK(std::abs(std::abs(R(mm, nn)) - 1.0) < 1e-6);
                    CHECK(R.squaredNorm() == doctest::Approx(1.0).epsilon(1e-6));
                    CVector e = CVector::Zero(MN);
                    e[k * M + l] = 1.0;
                    CHECK((Hm.H.col(k * M + l) - time_route(ps, 0.22, e, M, N, Ts)).norm() < 1e-6);
                }
            }
        }
    }
}

TEST_CASE("elementwise, block and time-domain constructions agree") {
    const int M = 8, N = 4;
    const double Ts = 1.0 / (M * 15e3);
    const EffectivePulse g = rc_effective_pulse(0.22, 64, 16, Ts);
    Rng rng(7);
    for (int t = 0; t < 5; ++t) {
        const PathSet ps = random_paths(2, M, N, Ts, rng);
        const auto comps = path_components(ps, g, M, N);
        const CMatrix H1 = assemble_elementwise(comps, M, N);
        const CMatrix H2 = assemble_block_form(comps, M, N);
        CHECK((H1 - H2).norm() / H1.norm() < 1e-12);
        for (int i = 0; i < 20; ++i) {
            const CVector d = random_vector(M * N, rng);
            const CVector z = time_route(ps, 0.22, d, M, N, Ts);
            CHECK((H1 * d - z).norm() / z.norm() < 1e-6);
        }
    }
}

TEST_CASE("periodized response wraps around the frame") {
    const EffectivePulse g = rc_effective_pulse(0.22, 64, 16, 1.0);
    const CVector r = periodized_response(g, 0.3, 8);
    for (int k = 0; k < 8; ++k) {
        double want = 0.0;
        for (int j = -40; j <= 40; ++j) {
            const double x = k + 8.0 * j - 0.3;
            if (std::abs(x) <= 32.0) want += rc_value(x, 0.22, 1.0);
        }
        CHECK(std::abs(r[k] - want) < 1e-7);   // cubic interpolation of the sampled pulse
    }
}

TEST_CASE("component dimensions are checked") {
    std::vector<ChannelComponent> comps(1);
    comps[0].u = CVector::Ones(8);
    comps[0].g = CVector::Ones(7);
    CHECK_THROWS_AS(assemble_elementwise(comps, 4, 2), InvalidArgument);
    EffectiveChannelMatrix Hm;
    Hm.H = CMatrix::Identity(4, 4);
    CHECK_THROWS_AS(apply_dd(Hm, CVector::Ones(3)), InvalidArgument);
}
