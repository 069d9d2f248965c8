#pragma once

// Experiment configuration: a versioned JSON document layered over built-in
// defaults, plus dotted-key overrides ("channel.speed_kmh=300").

#include "ddsim/channel.hpp"
#include "ddsim/estimation.hpp"
#include "ddsim/modem.hpp"
#include "ddsim/pulse.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace ddsim {

inline constexpr int kSchemaVersion = 1;

enum class ChannelKind { Random, Awgn };

struct PulseSettings {
    std::vector<std::string> kinds{"rc", "tfl"};
    double rolloff = 0.22;
    int oversampling = 64;
    int span = 16;
    TflCoefficients tfl_coeffs = default_tfl_coefficients();
    double tfl_scale = 0.0;            // 0: calibrate
    std::string tfl_route = "continuous";
};

struct TrialSettings {
    int min_trials = 50;
    int max_trials = 2000;
    int target_errors = 200;           // bit errors per point before stopping
    int flag_errors = 100;             // points with fewer errors are flagged
    int batch = 10;                    // stopping rule is checked per batch
};

struct SweepSettings {
    std::vector<double> snr_db{0, 5, 10, 15, 20};
    std::vector<double> speeds_kmh{0, 100, 200, 300, 400, 500};
    std::vector<double> to_fracs{0.0, 0.1, 0.2, 0.3, 0.4};
    double speed_snr_db = 15.0;        // ber-speed operating point
    double to_snr_db = 20.0;           // ber-to operating point
    double to_ltv_speed_kmh = 500.0;
    std::vector<std::string> csi{"perfect", "estimated"};
    std::vector<std::string> speed_csi{"estimated"};
    std::vector<std::string> to_modes{"awgn", "ltv"};
};

struct PulseDumpSettings {
    std::vector<double> delays{0.0, 0.3, 1.0};   // in T_s
    double t_min = -6.0;
    double t_max = 8.0;
    int points_per_symbol = 16;
};

struct SpreadSettings {
    double delay_symbols = 1.35;
    double doppler_bins = 1.4;
    std::vector<double> rolloffs{0.0, 0.2, 0.5, 1.0};
    int input_row = 4;
    int input_col = 8;
    int neighbourhood = 1;             // delay bins on each side of the nominal delay
};

struct ExperimentConfig {
    int schema_version = kSchemaVersion;
    std::uint64_t seed = 1;
    ModemConfig modem;
    PulseSettings pulse;
    ChannelConfig channel;
    ChannelKind channel_kind = ChannelKind::Random;
    bool pilot_enabled = true;
    PilotLayout pilot;
    SweepSettings sweep;
    TrialSettings trials;
    PulseDumpSettings pulse_dump;
    SpreadSettings spread;

    void validate() const;
};

/// Defaults, then the file (if non-empty path), then overrides in order.
ExperimentConfig load_config(const std::string& path, const std::vector<std::string>& overrides = {});
ExperimentConfig parse_config(const std::string& json_text, const std::vector<std::string>& overrides = {});

/// Canonical JSON of the fully resolved configuration.
std::string config_to_json(const ExperimentConfig& cfg, int indent = -1);

/// FNV-1a (64 bit) of the canonical JSON, as 16 hex digits.
std::string config_hash(const ExperimentConfig& cfg);

}  // namespace ddsim
