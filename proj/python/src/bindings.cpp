// Python bindings: transforms, pulse helpers and the experiment sweeps.

#include "ddsim/config.hpp"
#include "ddsim/experiments.hpp"
#include "ddsim/grid_zak.hpp"
#include "ddsim/pulse.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

namespace py = pybind11;
using namespace ddsim;

namespace {

py::dict record_dict(const ResultRecord& r) {
    py::dict d;
    d["sweep_value"] = r.sweep_value;
    d["metric"] = r.metric;
    d["mean"] = r.mean;
    d["stderr"] = r.stderr_;
    d["trials"] = r.trials;
    d["pulse"] = r.pulse;
    d["mode"] = r.mode;
    d["seed"] = r.seed;
    d["config_hash"] = r.config_hash;
    d["errors"] = r.errors;
    d["bits"] = r.bits;
    d["flagged"] = r.flagged;
    return d;
}

py::dict summary_dict(const RunSummary& s) {
    py::list records;
    for (const auto& r : s.records) records.append(record_dict(r));
    py::dict d;
    d["experiment"] = s.experiment;
    d["sweep_axis"] = s.sweep_axis;
    d["records"] = records;
    d["numerical_failures"] = s.numerical_failures;
    d["failure_messages"] = s.failure_messages;
    return d;
}

using Runner = RunSummary (*)(const ExperimentConfig&);

py::dict run(Runner fn, const std::string& config, const std::vector<std::string>& overrides) {
    const ExperimentConfig cfg = load_config(config, overrides);
    RunSummary s;
    {
        py::gil_scoped_release release;
        s = fn(cfg);
    }
    return summary_dict(s);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Delay-Doppler link simulator";

    py::register_exception<InvalidArgument>(m, "InvalidArgument", PyExc_ValueError);
    py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);

    m.def("idzt", [](const CMatrix& grid) { return idzt_sequence(grid); }, py::arg("grid"),
          "Inverse discrete Zak transform of an M x N grid (column-major vec).");
    m.def("dzt", [](const CVector& x, int M, int N) { return dzt_sequence(x, M, N); }, py::arg("x"), py::arg("M"),
          py::arg("N"), "Discrete Zak transform of a length-MN sequence.");

    m.def("srrc", &srrc_value, py::arg("t"), py::arg("rolloff"), py::arg("symbol_period") = 1.0);
    m.def("rc", &rc_value, py::arg("t"), py::arg("rolloff"), py::arg("symbol_period") = 1.0);
    m.def(
        "discrete_hermite",
        [](int size, double sigma, int count) { return discrete_hermite(size, sigma, count).vectors; },
        py::arg("size"), py::arg("sigma") = 1.0, py::arg("count") = -1,
        "Discrete Gaussian-Hermite basis as columns.");

    m.def(
        "effective_pulse",
        [](const std::string& kind, const std::vector<double>& t, const std::string& config,
           const std::vector<std::string>& overrides) {
            const PulseModel pm = make_pulse_model(kind, load_config(config, overrides));
            std::vector<double> out;
            out.reserve(t.size());
            for (double x : t) out.push_back(pm.effective.at_symbols(x));
            return out;
        },
        py::arg("kind"), py::arg("t"), py::arg("config") = "", py::arg("overrides") = std::vector<std::string>{},
        "Effective (transmit * matched filter) pulse at times in symbol periods.");
    m.def(
        "isi_energy",
        [](const std::string& kind, double offset, const std::string& config,
           const std::vector<std::string>& overrides) {
            return isi_energy(make_pulse_model(kind, load_config(config, overrides)).effective, offset);
        },
        py::arg("kind"), py::arg("offset"), py::arg("config") = "", py::arg("overrides") = std::vector<std::string>{});

    m.def(
        "config_json",
        [](const std::string& config, const std::vector<std::string>& overrides) {
            return config_to_json(load_config(config, overrides), 2);
        },
        py::arg("config") = "", py::arg("overrides") = std::vector<std::string>{});

    const auto bind_run = [&m](const char* name, Runner fn, const char* doc) {
        m.def(
            name,
            [fn](const std::string& config, const std::vector<std::string>& overrides) {
                return run(fn, config, overrides);
            },
            py::arg("config") = "", py::arg("overrides") = std::vector<std::string>{}, doc);
    };
    bind_run("ber_snr", run_ber_vs_snr, "MMSE BER versus SNR.");
    bind_run("nmse_snr", run_nmse_vs_snr, "Channel estimation NMSE versus SNR.");
    bind_run("ber_speed", run_ber_vs_speed, "MMSE BER versus speed.");
    bind_run("ber_to", run_ber_vs_to, "BER versus fractional timing offset.");

    m.def(
        "results_csv",
        [](const std::string& experiment, const std::string& config, const std::vector<std::string>& overrides) {
            Runner fn = experiment == "ber-snr"     ? run_ber_vs_snr
                        : experiment == "nmse-snr"  ? run_nmse_vs_snr
                        : experiment == "ber-speed" ? run_ber_vs_speed
                        : experiment == "ber-to"    ? run_ber_vs_to
                                                    : nullptr;
            if (!fn) throw InvalidArgument("unknown experiment " + experiment);
            const ExperimentConfig cfg = load_config(config, overrides);
            std::ostringstream os;
            {
                py::gil_scoped_release release;
                write_results_csv(os, fn(cfg).records);
            }
            return os.str();
        },
        py::arg("experiment"), py::arg("config") = "", py::arg("overrides") = std::vector<std::string>{},
        "Run an experiment and return its CSV text.");
}
