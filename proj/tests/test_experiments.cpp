#include "ddsim/config.hpp"
#include "ddsim/experiments.hpp"

#include "doctest.h"

#include <cmath>
#include <cstdlib>
#include <sstream>

using namespace ddsim;

namespace {

ExperimentConfig quick(int trials = 2) {
    ExperimentConfig cfg;
    cfg.trials.min_trials = trials;
    cfg.trials.max_trials = trials;
    cfg.trials.batch = trials;
    cfg.trials.target_errors = 0;
    return cfg;
}

ResultRecord point(double x, double ber) {
    ResultRecord r;
    r.sweep_value = x;
    r.mean = ber;
    return r;
}

std::string csv_of(const RunSummary& s) {
    std::ostringstream os;
    write_results_csv(os, s.records);
    return os.str();
}

}  // namespace

TEST_CASE("default configuration") {
    const ExperimentConfig cfg = load_config("");
    CHECK(cfg.modem.M == 32);
    CHECK(cfg.modem.N == 16);
    CHECK(cfg.modem.subcarrier_spacing == 15e3);
    CHECK(cfg.modem.carrier_hz == 5.9e9);
    CHECK(cfg.channel.paths == 6);
    CHECK(cfg.channel.speed_kmh == 500.0);
    CHECK(cfg.pulse.rolloff == 0.22);
    CHECK(cfg.pilot.seq_len == 9);
    CHECK(cfg.pilot.pilot_power_db == 30.0);
    CHECK(cfg.sweep.snr_db == std::vector<double>{0, 5, 10, 15, 20});
}

TEST_CASE("configuration overrides and validation") {
    const ExperimentConfig cfg = parse_config(R"({"modem": {"M": 64}, "seed": 9})", {"channel.speed_kmh=120",
                                                                                       "pulse.kinds=[\"tfl\"]"});
    CHECK(cfg.modem.M == 64);
    CHECK(cfg.seed == 9);
    CHECK(cfg.channel.speed_kmh == 120.0);
    CHECK(cfg.pulse.kinds == std::vector<std::string>{"tfl"});

    CHECK_THROWS_AS(parse_config(R"({"modem": {"Mx": 64}})"), InvalidArgument);
    CHECK_THROWS_AS(parse_config("{", {}), InvalidArgument);
    CHECK_THROWS_AS(parse_config("{}", {"trials.min=0"}), InvalidArgument);
    CHECK_THROWS_AS(parse_config("{}", {"pulse.kinds=[\"sinc\"]"}), InvalidArgument);
    CHECK_THROWS_AS(parse_config("{}", {"sweep.to_fracs=[0.6]"}), InvalidArgument);
    CHECK_THROWS_AS(parse_config("{}", {"nonsense"}), InvalidArgument);
    CHECK_THROWS_AS(parse_config("{}", {"modem.M=16"}), InvalidArgument);
}

TEST_CASE("configuration hash is canonical") {
    const ExperimentConfig a = load_config("");
    const ExperimentConfig b = parse_config(config_to_json(a, 2));
    CHECK(config_hash(a) == config_hash(b));
    CHECK(config_hash(a).size() == 16);
    CHECK(config_hash(a) != config_hash(parse_config("{}", {"seed=2"})));
}

TEST_CASE("seed derivation") {
    CHECK(derive_seed(1, 0, 0) == derive_seed(1, 0, 0));
    CHECK(derive_seed(1, 0, 0) != derive_seed(1, 1, 0));
    CHECK(derive_seed(1, 0, 1) != derive_seed(1, 0, 2));
    CHECK(derive_seed(1, 0, 2, 5) != derive_seed(1, 0, 2, 6));
    CHECK(derive_seed(1, 3, 0) != derive_seed(2, 3, 0));
}

TEST_CASE("snr interpolation on a BER curve") {
    const std::vector<ResultRecord> c = {point(0, 1e-1), point(10, 1e-2), point(20, 1e-3)};
    CHECK(snr_at_ber(c, 1e-2) == doctest::Approx(10.0));
    CHECK(snr_at_ber(c, std::sqrt(1e-1 * 1e-2)) == doctest::Approx(5.0));
    CHECK(snr_at_ber(c, 1e-4) == doctest::Approx(30.0));
    CHECK(snr_at_ber(c, 0.5) == 0.0);
    const std::vector<ResultRecord> flat = {point(0, 1e-1), point(10, 1e-1)};
    CHECK(std::isinf(snr_at_ber(flat, 1e-2)));

    const std::vector<ResultRecord> rc = {point(0, 1e-1), point(10, 1e-2)};
    const std::vector<ResultRecord> tfl = {point(0, 1e-1), point(10, 1e-3)};
    CHECK(snr_gap_db(rc, tfl) == doctest::Approx(10.0));
}

TEST_CASE("energy outside a delay band") {
    CMatrix g = CMatrix::Zero(8, 4);
    g(3, 0) = 1.0;
    g(4, 2) = 1.0;
    g(7, 1) = 1.0;
    g(0, 3) = 1.0;
    CHECK(energy_outside_delay_band(g, 3, 1) == doctest::Approx(0.5));
    CHECK(energy_outside_delay_band(g, 0, 1) == doctest::Approx(0.5));
    CHECK(energy_outside_delay_band(g, 3, 0) == doctest::Approx(0.75));
}

TEST_CASE("pulse dump") {
    ExperimentConfig cfg = load_config("");
    cfg.pulse.kinds = {"rc"};
    const auto rows = dump_pulse_response(cfg);
    for (const auto& r : rows) {
        if (!r.sampled) continue;
        const double k = std::round(r.t);
        if (r.path == 0) CHECK(std::abs(r.value - (k == 0 ? 1.0 : 0.0)) < 1e-4);
        if (r.path == 2) CHECK(std::abs(r.value - (k == 1 ? 1.0 : 0.0)) < 1e-4);
        if (r.path == 1 && k == 0) CHECK(std::abs(r.value - 0.8549) < 1e-3);
        if (r.path == 1 && k == 1) CHECK(std::abs(r.value - 0.3598) < 1e-3);
    }
    std::ostringstream os;
    write_pulse_dump_csv(os, rows);
    CHECK(os.str().rfind("pulse,path,", 0) == 0);
}

TEST_CASE("delay-Doppler spread") {
    ExperimentConfig cfg = load_config("");
    cfg.spread.delay_symbols = 2.0;
    cfg.spread.doppler_bins = 1.0;
    cfg.spread.rolloffs = {0.22};
    cfg.pulse.kinds = {"rc"};
    const auto on_grid = dump_dd_spread(cfg);
    REQUIRE(on_grid.size() == 1);
    const CMatrix& r = on_grid[0].response;
    const int row = cfg.spread.input_row + 2;
    const int col = cfg.spread.input_col + 1;
    CHECK(std::norm(r(row, col)) / r.squaredNorm() > 0.999);

    cfg = load_config("");
    cfg.pulse.kinds = {"rc"};
    cfg.spread.rolloffs = {0.0};
    const auto zero_rolloff = dump_dd_spread(cfg);
    CHECK(zero_rolloff[0].outside_fraction > 0.10);
}

TEST_CASE("noise-free perfect CSI detection is error free") {
    ExperimentConfig cfg = quick();
    cfg.sweep.snr_db = {INFINITY};
    cfg.sweep.csi = {"perfect"};
    cfg.channel.fractional_delay = false;
    const RunSummary s = run_ber_vs_snr(cfg);
    REQUIRE(s.records.size() == 2);
    for (const auto& r : s.records) {
        CHECK(r.trials == 2);
        CHECK(r.mean == 0.0);
    }
    CHECK(s.numerical_failures == 0);
}

TEST_CASE("noise-free integer-tap channel estimation") {
    ExperimentConfig cfg = quick();
    cfg.pulse.kinds = {"rc"};
    cfg.pulse.span = 128;
    cfg.sweep.snr_db = {INFINITY};
    cfg.channel.fractional_delay = false;
    cfg.channel.speed_kmh = 0.0;
    const RunSummary s = run_nmse_vs_snr(cfg);
    REQUIRE(s.records.size() == 1);
    CHECK(s.records[0].metric == "nmse");
    CHECK(s.records[0].mean < 1e-6);
}

TEST_CASE("zero speed reproduces the static channel run") {
    ExperimentConfig cfg = quick();
    cfg.pulse.kinds = {"tfl"};
    cfg.channel.speed_kmh = 0.0;
    cfg.sweep.snr_db = {15.0};
    cfg.sweep.csi = {"perfect"};
    cfg.sweep.speeds_kmh = {0.0};
    cfg.sweep.speed_snr_db = 15.0;
    cfg.sweep.speed_csi = {"perfect"};
    const auto a = run_ber_vs_snr(cfg).records.at(0);
    const auto b = run_ber_vs_speed(cfg).records.at(0);
    CHECK(a.errors == b.errors);
    CHECK(a.bits == b.bits);
}

TEST_CASE("results do not depend on the worker count") {
    ExperimentConfig cfg = quick(4);
    cfg.sweep.snr_db = {5.0, 10.0};
    cfg.sweep.csi = {"perfect", "estimated"};
    setenv("DDSIM_WORKERS", "1", 1);
    const std::string one = csv_of(run_ber_vs_snr(cfg));
    setenv("DDSIM_WORKERS", "4", 1);
    const std::string four = csv_of(run_ber_vs_snr(cfg));
    unsetenv("DDSIM_WORKERS");
    CHECK(one == four);
    CHECK(one.rfind("sweep_value,metric,mean,stderr,trials,pulse,mode,seed,config_hash\n", 0) == 0);
}

TEST_CASE("worker count from the environment") {
    setenv("DDSIM_WORKERS", "3", 1);
    CHECK(worker_count() == 3);
    setenv("DDSIM_WORKERS", "zero", 1);
    CHECK(worker_count() >= 1);
    unsetenv("DDSIM_WORKERS");
}

TEST_CASE("numerical failures are counted, not fatal") {
    ExperimentConfig cfg = quick();
    cfg.pulse.kinds = {"rc"};
    cfg.sweep.snr_db = {10.0};
    cfg.sweep.csi = {"estimated"};
    cfg.pilot.pilot_power_db = -INFINITY;
    const RunSummary s = run_ber_vs_snr(cfg);
    CHECK(s.numerical_failures == 2);
    CHECK(s.records.at(0).trials == 0);
    CHECK_FALSE(s.failure_messages.empty());
}

TEST_CASE("estimation needs the pilot") {
    ExperimentConfig cfg = quick();
    cfg.pilot_enabled = false;
    CHECK_THROWS_AS(run_ber_vs_snr(cfg), InvalidArgument);
}

TEST_CASE("summary json lists flagged points") {
    ExperimentConfig cfg = quick();
    cfg.pulse.kinds = {"rc"};
    cfg.sweep.snr_db = {INFINITY};
    cfg.sweep.csi = {"perfect"};
    cfg.channel.fractional_delay = false;
    const RunSummary s = run_ber_vs_snr(cfg);
    std::ostringstream os;
    write_summary_json(os, s, cfg);
    CHECK(os.str().find("\"flagged_points\"") != std::string::npos);
    CHECK(s.records[0].flagged);
}
