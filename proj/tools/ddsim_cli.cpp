// ddsim command line: one subcommand per experiment.

#include "ddsim/config.hpp"
#include "ddsim/experiments.hpp"

#include "CLI11.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace ddsim;

namespace {

struct Options {
    std::string config;
    std::string out = "results";
    std::optional<std::uint64_t> seed;
    std::string pulse;
    std::vector<std::string> overrides;
};

void add_common(CLI::App* sub, Options& o) {
    sub->add_option("--config", o.config, "JSON configuration file")->check(CLI::ExistingFile);
    sub->add_option("--out", o.out, "Output directory");
    sub->add_option("--seed", o.seed, "Master seed (u64)");
    sub->add_option("--pulse", o.pulse, "Restrict to one pulse")->check(CLI::IsMember({"rc", "tfl"}));
    sub->add_option("--override", o.overrides, "Configuration override key=value (repeatable)");
}

ExperimentConfig resolve(const Options& o) {
    std::vector<std::string> ov = o.overrides;
    if (o.seed) ov.push_back("seed=" + std::to_string(*o.seed));
    if (!o.pulse.empty()) ov.push_back("pulse.kinds=[\"" + o.pulse + "\"]");
    return load_config(o.config, ov);
}

std::ofstream open_out(const fs::path& p) {
    std::ofstream f(p);
    if (!f) throw std::runtime_error("cannot write " + p.string());
    return f;
}

int run_sweep(const std::string& name, const Options& o, RunSummary (*fn)(const ExperimentConfig&)) {
    const ExperimentConfig cfg = resolve(o);
    fs::create_directories(o.out);
    const auto t0 = std::chrono::steady_clock::now();
    const RunSummary s = fn(cfg);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    {
        auto f = open_out(fs::path(o.out) / (name + ".csv"));
        write_results_csv(f, s.records);
    }
    {
        auto f = open_out(fs::path(o.out) / (name + ".json"));
        write_summary_json(f, s, cfg);
    }
    long flagged = 0;
    for (const auto& r : s.records) flagged += r.flagged ? 1 : 0;
    std::cerr << name << ": " << s.records.size() << " points, " << flagged << " flagged, "
              << s.numerical_failures << " numerical failures, " << secs << " s\n";
    for (const auto& m : s.failure_messages) std::cerr << "  " << m << '\n';
    return s.numerical_failures > 0 ? 3 : 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Delay-Doppler link simulator"};
    app.require_subcommand(1);

    Options o;
    auto* pulse_dump = app.add_subcommand("pulse-dump", "Effective pulse responses for a set of path delays");
    auto* dd_spread = app.add_subcommand("dd-spread", "DD-domain spreading of a unit impulse");
    auto* nmse_snr = app.add_subcommand("nmse-snr", "Channel estimation NMSE versus SNR");
    auto* ber_snr = app.add_subcommand("ber-snr", "MMSE BER versus SNR");
    auto* ber_speed = app.add_subcommand("ber-speed", "MMSE BER versus speed");
    auto* ber_to = app.add_subcommand("ber-to", "BER versus fractional timing offset");
    for (auto* s : {pulse_dump, dd_spread, nmse_snr, ber_snr, ber_speed, ber_to}) add_common(s, o);

    bool print_config = false;
    app.add_flag("--print-config", print_config, "Print the resolved configuration and exit");

    CLI11_PARSE(app, argc, argv);

    try {
        if (print_config) {
            std::cout << config_to_json(resolve(o), 2) << '\n';
            return 0;
        }
        if (pulse_dump->parsed()) {
            const auto cfg = resolve(o);
            fs::create_directories(o.out);
            auto f = open_out(fs::path(o.out) / "pulse-dump.csv");
            write_pulse_dump_csv(f, dump_pulse_response(cfg));
            return 0;
        }
        if (dd_spread->parsed()) {
            const auto cfg = resolve(o);
            fs::create_directories(o.out);
            const auto panels = dump_dd_spread(cfg);
            auto f = open_out(fs::path(o.out) / "dd-spread.csv");
            write_spread_csv(f, panels);
            auto j = open_out(fs::path(o.out) / "dd-spread.json");
            write_spread_json(j, panels, cfg);
            for (const auto& p : panels) std::cerr << p.label << ": outside " << p.outside_fraction << '\n';
            return 0;
        }
        if (nmse_snr->parsed()) return run_sweep("nmse-snr", o, run_nmse_vs_snr);
        if (ber_snr->parsed()) return run_sweep("ber-snr", o, run_ber_vs_snr);
        if (ber_speed->parsed()) return run_sweep("ber-speed", o, run_ber_vs_speed);
        if (ber_to->parsed()) return run_sweep("ber-to", o, run_ber_vs_to);
    } catch (const InvalidArgument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
