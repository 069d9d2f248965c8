#include "ddsim/channel.hpp"
#include "ddsim/pulse.hpp"

#include "doctest.h"

#include <cmath>
#include <random>

using namespace ddsim;

namespace {

constexpr double kTs = 1.0 / (32 * 15e3);

Waveform waveform_from(const PulsePrototype& p) {
    Waveform w;
    w.samples.assign(p.samples.begin(), p.samples.end());
    w.oversampling = p.oversampling;
    w.first_index = -p.centre_index();
    w.symbol_period = p.symbol_period;
    return w;
}

// Matched filter output at t = x T_s, summing over the prototype support.
cplx matched_at(const Waveform& r, const PulsePrototype& p, double x) {
    const auto shift = static_cast<std::ptrdiff_t>(std::llround(x * p.oversampling));
    cplx acc = 0.0;
    for (std::size_t i = 0; i < p.samples.size(); ++i) {
        const auto idx = shift + static_cast<std::ptrdiff_t>(i) - p.centre_index();
        acc += r.at(idx) * p.samples[i];
    }
    return acc * p.fine_step();
}

}  // namespace

TEST_CASE("maximum Doppler at 500 km/h and 5.9 GHz") {
    const double nu = max_doppler_hz(500.0, 5.9e9);
    CHECK(nu == doctest::Approx(5.9e9 * (500.0 / 3.6) / 299792458.0));
    CHECK(std::abs(nu - 2733.0) < 1.0);
    const double bins = nu * 32 * 16 * kTs;
    CHECK(std::abs(bins - 2.92) < 0.01);
}

TEST_CASE("static channel has no Doppler") {
    ChannelConfig cfg;
    cfg.speed_kmh = 0.0;
    Rng rng(1);
    const PathSet ps = generate_channel(cfg, kTs, rng);
    REQUIRE(ps.size() == 6);
    for (const auto& p : ps.paths) CHECK(p.doppler == 0.0);
}

TEST_CASE("channel draws share the random stream across speeds") {
    ChannelConfig slow, fast;
    slow.speed_kmh = 0.0;
    fast.speed_kmh = 500.0;
    Rng a(9), b(9);
    const PathSet s = generate_channel(slow, kTs, a);
    const PathSet f = generate_channel(fast, kTs, b);
    const double nu = max_doppler_hz(500.0, 5.9e9);
    for (std::size_t i = 0; i < s.size(); ++i) {
        CHECK(s.paths[i].gain == f.paths[i].gain);
        CHECK(s.paths[i].delay == f.paths[i].delay);
        CHECK(std::abs(f.paths[i].doppler) <= nu * (1 + 1e-12));
    }
}

TEST_CASE("channel delays follow the tap grid") {
    ChannelConfig cfg;
    Rng rng(4);
    for (int t = 0; t < 200; ++t) {
        const PathSet ps = generate_channel(cfg, kTs, rng);
        for (std::size_t i = 0; i < ps.size(); ++i) {
            const double x = ps.paths[i].delay / kTs - static_cast<double>(i);
            CHECK(x >= (i == 0 ? 0.0 : -0.5) - 1e-12);
            CHECK(x <= 0.5 + 1e-12);
            CHECK(ps.paths[i].delay >= 0.0);
        }
    }
    cfg.fractional_delay = false;
    const PathSet ps = generate_channel(cfg, kTs, rng);
    for (std::size_t i = 0; i < ps.size(); ++i) CHECK(ps.paths[i].delay / kTs == doctest::Approx(i));
}

TEST_CASE("channel power profile is normalized") {
    ChannelConfig cfg;
    Rng rng(21);
    double total = 0.0, first = 0.0, second = 0.0;
    const int T = 20000;
    for (int t = 0; t < T; ++t) {
        const PathSet ps = generate_channel(cfg, kTs, rng);
        total += ps.total_power();
        first += std::norm(ps.paths[0].gain);
        second += std::norm(ps.paths[1].gain);
    }
    CHECK(total / T == doctest::Approx(1.0).epsilon(0.03));
    CHECK(first / second == doctest::Approx(std::exp(1.0)).epsilon(0.05));
}

TEST_CASE("path helpers") {
    PathSet ps;
    ps.paths.push_back({cplx(0.0, 2.0), 1e-6, 250.0});
    CHECK(std::abs(ps.shifted_gain(0) - cplx(0.0, 2.0) * std::polar(1.0, 2 * kPi * 250.0 * 1e-6)) < 1e-15);
    CHECK(ps.normalized_doppler(0, 32, 16, kTs) == doctest::Approx(250.0 * 32 * 16 * kTs));
    CHECK(ps.max_delay() == 1e-6);
    CHECK(ps.total_power() == doctest::Approx(4.0));
}

TEST_CASE("waveform channel: identity and integer shift") {
    const PulsePrototype p = srrc_prototype(0.22, 16, 8, kTs);
    const Waveform tx = waveform_from(p);
    PathSet id;
    id.paths.push_back({1.0, 0.0, 0.0});
    const Waveform r0 = apply_channel_waveform(tx, id);
    for (auto j = tx.first_index; j < tx.end_index(); ++j) CHECK(std::abs(r0.at(j) - tx.at(j)) < 1e-14);

    PathSet sh;
    sh.paths.push_back({1.0, kTs, 0.0});
    const Waveform r1 = apply_channel_waveform(tx, sh);
    for (auto j = tx.first_index; j < tx.end_index(); ++j) CHECK(std::abs(r1.at(j + 16) - tx.at(j)) < 1e-14);
}

TEST_CASE("waveform channel: Doppler is a phase ramp in absolute time") {
    const PulsePrototype p = srrc_prototype(0.22, 16, 8, kTs);
    const Waveform tx = waveform_from(p);
    PathSet ps;
    ps.paths.push_back({1.0, 0.0, 900.0});
    const Waveform r = apply_channel_waveform(tx, ps);
    for (auto j = tx.first_index; j < tx.end_index(); j += 7) {
        const cplx want = tx.at(j) * std::polar(1.0, 2 * kPi * 900.0 * j * tx.fine_step());
        CHECK(std::abs(r.at(j) - want) < 1e-12);
    }
}

TEST_CASE("two-path matched filter output matches shifted raised cosines") {
    const PulsePrototype p = srrc_prototype(0.22, 64, 16, kTs);
    const Waveform tx = waveform_from(p);
    PathSet ps;
    ps.paths.push_back({1.0, 0.0, 0.0});
    ps.paths.push_back({1.0, 0.3 * kTs, 0.0});
    const Waveform r = apply_channel_waveform(tx, ps);
    for (int k = -4; k <= 5; ++k) {
        const double want = rc_value(k * kTs, 0.22, kTs) + rc_value((k - 0.3) * kTs, 0.22, kTs);
        CHECK(std::abs(matched_at(r, p, k) - want) < 1e-3);
    }
}

TEST_CASE("awgn") {
    CHECK(noise_variance(10.0) == doctest::Approx(0.1));
    CHECK(noise_variance(INFINITY) == 0.0);
    Rng rng(2);
    CVector x = CVector::Constant(16, cplx(1.0, -1.0));
    const CVector y = x;
    add_awgn(x, INFINITY, rng);
    CHECK(x == y);

    CVector z = CVector::Zero(1000000);
    add_awgn(z, 10.0, rng);
    CHECK(z.squaredNorm() / z.size() == doctest::Approx(0.1).epsilon(0.01));
    CHECK(std::abs(z.mean()) < 1e-3);
}

TEST_CASE("sampling offset range") {
    CHECK(fractional_to(0.0).fraction() == 0.0);
    CHECK(fractional_to(0.3).fraction() == 0.3);
    CHECK_THROWS_AS(fractional_to(0.5), InvalidArgument);
    CHECK_THROWS_AS(fractional_to(-0.1), InvalidArgument);
}
