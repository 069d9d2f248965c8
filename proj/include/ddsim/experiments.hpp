#pragma once

// Monte Carlo sweeps, pulse/spread dumps and result writers.

#include "ddsim/config.hpp"
#include "ddsim/effective_channel.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <ostream>
#include <string>
#include <vector>

namespace ddsim {

struct ResultRecord {
    double sweep_value = 0.0;
    std::string metric;        // "ber" or "nmse"
    double mean = 0.0;
    double stderr_ = 0.0;
    long trials = 0;
    std::string pulse;
    std::string mode;
    std::uint64_t seed = 0;
    std::string config_hash;
    long errors = 0;           // bit errors (ber only)
    long bits = 0;
    bool flagged = false;      // fewer than flag_errors bit errors
};

struct RunSummary {
    std::string experiment;
    std::string sweep_axis;
    std::vector<ResultRecord> records;
    long numerical_failures = 0;
    std::vector<std::string> failure_messages;   // first few, for diagnostics
};

/// A pulse ready for simulation: transmit prototype plus the effective pulse
/// used to build H.
struct PulseModel {
    std::string name;          // "rc" or "tfl"
    PulsePrototype prototype;
    EffectivePulse effective;
};

PulseModel make_pulse_model(const std::string& kind, const ExperimentConfig& cfg);

/// Worker count: DDSIM_WORKERS if set and positive, else hardware concurrency.
int worker_count();

RunSummary run_ber_vs_snr(const ExperimentConfig& cfg);
RunSummary run_nmse_vs_snr(const ExperimentConfig& cfg);
RunSummary run_ber_vs_speed(const ExperimentConfig& cfg);
RunSummary run_ber_vs_to(const ExperimentConfig& cfg);

/// Records of one (pulse, mode) series ordered by sweep value.
std::vector<ResultRecord> select(const RunSummary& s, const std::string& pulse, const std::string& mode);

/// SNR (dB) at which a BER curve reaches `level`, by linear interpolation of
/// log10(BER) between sweep points; extrapolates from the last two points of
/// a decreasing tail and returns +inf when the curve never gets there.
double snr_at_ber(const std::vector<ResultRecord>& curve, double level);

/// Gap SNR_rc(L) - SNR_tfl(L) at L = TFL's BER at the highest SNR.
double snr_gap_db(const std::vector<ResultRecord>& rc, const std::vector<ResultRecord>& tfl);

struct PulseDumpRow {
    std::string pulse;
    int path = 0;
    double delay = 0.0;        // in T_s
    double t = 0.0;            // in T_s
    double value = 0.0;
    bool sampled = false;      // t is an integer multiple of T_s
};

std::vector<PulseDumpRow> dump_pulse_response(const ExperimentConfig& cfg);

struct SpreadPanel {
    std::string label;         // "rc_beta=0.2", "tfl"
    CMatrix response;          // M x N received grid
    double outside_fraction = 0.0;
};

std::vector<SpreadPanel> dump_dd_spread(const ExperimentConfig& cfg);

/// Fraction of energy outside +-`half` delay rows around `centre_row`
/// (all Doppler columns).
double energy_outside_delay_band(const CMatrix& grid, int centre_row, int half);

void write_results_csv(std::ostream& os, const std::vector<ResultRecord>& records);
void write_summary_json(std::ostream& os, const RunSummary& s, const ExperimentConfig& cfg);
void write_pulse_dump_csv(std::ostream& os, const std::vector<PulseDumpRow>& rows);
void write_spread_csv(std::ostream& os, const std::vector<SpreadPanel>& panels);
void write_spread_json(std::ostream& os, const std::vector<SpreadPanel>& panels, const ExperimentConfig& cfg);

}  // namespace ddsim
