#include "ddsim/config.hpp"

#include "json.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace ddsim {

using nlohmann::json;

namespace {

const char* kind_name(ChannelKind k) { return k == ChannelKind::Awgn ? "awgn" : "random"; }

ChannelKind kind_from(const std::string& s) {
    if (s == "awgn") return ChannelKind::Awgn;
    if (s == "random") return ChannelKind::Random;
    throw InvalidArgument("unknown channel kind '" + s + "'");
}

json to_json(const ExperimentConfig& c) {
    json j;
    j["schema_version"] = c.schema_version;
    j["seed"] = c.seed;
    j["modem"] = {{"M", c.modem.M},
                  {"N", c.modem.N},
                  {"subcarrier_spacing", c.modem.subcarrier_spacing},
                  {"carrier_hz", c.modem.carrier_hz},
                  {"cp_len", c.modem.cp_len},
                  {"rx_lead", c.modem.rx_lead}};
    j["pulse"] = {{"kinds", c.pulse.kinds},
                  {"rolloff", c.pulse.rolloff},
                  {"oversampling", c.pulse.oversampling},
                  {"span", c.pulse.span},
                  {"tfl_coeffs", c.pulse.tfl_coeffs},
                  {"tfl_scale", c.pulse.tfl_scale},
                  {"tfl_route", c.pulse.tfl_route}};
    j["channel"] = {{"kind", kind_name(c.channel_kind)},
                    {"paths", c.channel.paths},
                    {"pdp_decay", c.channel.pdp_decay},
                    {"speed_kmh", c.channel.speed_kmh},
                    {"fractional_delay", c.channel.fractional_delay},
                    {"frac_delay_min", c.channel.frac_delay_min},
                    {"frac_delay_max", c.channel.frac_delay_max}};
    j["pilot"] = {{"enabled", c.pilot_enabled},
                  {"seq_len", c.pilot.seq_len},
                  {"taps_before", c.pilot.taps_before},
                  {"taps_after", c.pilot.taps_after},
                  {"guard", c.pilot.guard},
                  {"power_db", c.pilot.pilot_power_db},
                  {"column", c.pilot.pilot_column},
                  {"first_row", c.pilot.first_row},
                  {"zc_root", c.pilot.zc_root},
                  {"bem_oversampling", c.pilot.bem_oversampling},
                  {"bem_order", c.pilot.bem_order}};
    j["sweep"] = {{"snr_db", c.sweep.snr_db},
                  {"speeds_kmh", c.sweep.speeds_kmh},
                  {"to_fracs", c.sweep.to_fracs},
                  {"speed_snr_db", c.sweep.speed_snr_db},
                  {"to_snr_db", c.sweep.to_snr_db},
                  {"to_ltv_speed_kmh", c.sweep.to_ltv_speed_kmh},
                  {"csi", c.sweep.csi},
                  {"speed_csi", c.sweep.speed_csi},
                  {"to_modes", c.sweep.to_modes}};
    j["trials"] = {{"min", c.trials.min_trials},
                   {"max", c.trials.max_trials},
                   {"target_errors", c.trials.target_errors},
                   {"flag_errors", c.trials.flag_errors},
                   {"batch", c.trials.batch}};
    j["pulse_dump"] = {{"delays", c.pulse_dump.delays},
                       {"t_min", c.pulse_dump.t_min},
                       {"t_max", c.pulse_dump.t_max},
                       {"points_per_symbol", c.pulse_dump.points_per_symbol}};
    j["dd_spread"] = {{"delay_symbols", c.spread.delay_symbols},
                      {"doppler_bins", c.spread.doppler_bins},
                      {"rolloffs", c.spread.rolloffs},
                      {"input_row", c.spread.input_row},
                      {"input_col", c.spread.input_col},
                      {"neighbourhood", c.spread.neighbourhood}};
    return j;
}

ExperimentConfig from_json(const json& j) {
    ExperimentConfig c;
    c.schema_version = j.at("schema_version").get<int>();
    c.seed = j.at("seed").get<std::uint64_t>();
    const auto& m = j.at("modem");
    c.modem.M = m.at("M");
    c.modem.N = m.at("N");
    c.modem.subcarrier_spacing = m.at("subcarrier_spacing");
    c.modem.carrier_hz = m.at("carrier_hz");
    c.modem.cp_len = m.at("cp_len");
    c.modem.rx_lead = m.at("rx_lead");
    const auto& p = j.at("pulse");
    c.pulse.kinds = p.at("kinds").get<std::vector<std::string>>();
    c.pulse.rolloff = p.at("rolloff");
    c.pulse.oversampling = p.at("oversampling");
    c.pulse.span = p.at("span");
    c.pulse.tfl_coeffs = p.at("tfl_coeffs").get<TflCoefficients>();
    c.pulse.tfl_scale = p.at("tfl_scale");
    c.pulse.tfl_route = p.at("tfl_route");
    const auto& ch = j.at("channel");
    c.channel_kind = kind_from(ch.at("kind"));
    c.channel.paths = ch.at("paths");
    c.channel.pdp_decay = ch.at("pdp_decay");
    c.channel.speed_kmh = ch.at("speed_kmh");
    c.channel.carrier_hz = c.modem.carrier_hz;
    c.channel.fractional_delay = ch.at("fractional_delay");
    c.channel.frac_delay_min = ch.at("frac_delay_min");
    c.channel.frac_delay_max = ch.at("frac_delay_max");
    const auto& pl = j.at("pilot");
    c.pilot_enabled = pl.at("enabled");
    c.pilot.seq_len = pl.at("seq_len");
    c.pilot.taps_before = pl.at("taps_before");
    c.pilot.taps_after = pl.at("taps_after");
    c.pilot.guard = pl.at("guard");
    c.pilot.pilot_power_db = pl.at("power_db");
    c.pilot.pilot_column = pl.at("column");
    c.pilot.first_row = pl.at("first_row");
    c.pilot.zc_root = pl.at("zc_root");
    c.pilot.bem_oversampling = pl.at("bem_oversampling");
    c.pilot.bem_order = pl.at("bem_order");
    const auto& s = j.at("sweep");
    c.sweep.snr_db = s.at("snr_db").get<std::vector<double>>();
    c.sweep.speeds_kmh = s.at("speeds_kmh").get<std::vector<double>>();
    c.sweep.to_fracs = s.at("to_fracs").get<std::vector<double>>();
    c.sweep.speed_snr_db = s.at("speed_snr_db");
    c.sweep.to_snr_db = s.at("to_snr_db");
    c.sweep.to_ltv_speed_kmh = s.at("to_ltv_speed_kmh");
    c.sweep.csi = s.at("csi").get<std::vector<std::string>>();
    c.sweep.speed_csi = s.at("speed_csi").get<std::vector<std::string>>();
    c.sweep.to_modes = s.at("to_modes").get<std::vector<std::string>>();
    const auto& t = j.at("trials");
    c.trials.min_trials = t.at("min");
    c.trials.max_trials = t.at("max");
    c.trials.target_errors = t.at("target_errors");
    c.trials.flag_errors = t.at("flag_errors");
    c.trials.batch = t.at("batch");
    const auto& d = j.at("pulse_dump");
    c.pulse_dump.delays = d.at("delays").get<std::vector<double>>();
    c.pulse_dump.t_min = d.at("t_min");
    c.pulse_dump.t_max = d.at("t_max");
    c.pulse_dump.points_per_symbol = d.at("points_per_symbol");
    const auto& sp = j.at("dd_spread");
    c.spread.delay_symbols = sp.at("delay_symbols");
    c.spread.doppler_bins = sp.at("doppler_bins");
    c.spread.rolloffs = sp.at("rolloffs").get<std::vector<double>>();
    c.spread.input_row = sp.at("input_row");
    c.spread.input_col = sp.at("input_col");
    c.spread.neighbourhood = sp.at("neighbourhood");
    return c;
}

// Recursively copies `patch` into `base`, rejecting keys the schema lacks.
void merge_strict(json& base, const json& patch, const std::string& where) {
    if (!patch.is_object()) throw InvalidArgument("configuration section '" + where + "' must be an object");
    for (auto it = patch.begin(); it != patch.end(); ++it) {
        const std::string key = where.empty() ? it.key() : where + "." + it.key();
        if (!base.contains(it.key())) throw InvalidArgument("unknown configuration key '" + key + "'");
        auto& slot = base[it.key()];
        if (slot.is_object()) {
            merge_strict(slot, it.value(), key);
        } else {
            slot = it.value();
        }
    }
}

void apply_override(json& base, const std::string& spec) {
    const auto eq = spec.find('=');
    if (eq == std::string::npos || eq == 0) throw InvalidArgument("override must look like key=value: '" + spec + "'");
    const std::string path = spec.substr(0, eq);
    const std::string text = spec.substr(eq + 1);
    json value = json::parse(text, nullptr, false);
    if (value.is_discarded()) value = text;

    json* node = &base;
    std::string::size_type start = 0;
    while (true) {
        const auto dot = path.find('.', start);
        const std::string key = path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
        if (!node->is_object() || !node->contains(key)) {
            throw InvalidArgument("unknown configuration key '" + path + "'");
        }
        node = &(*node)[key];
        if (dot == std::string::npos) break;
        start = dot + 1;
    }
    if (node->is_object()) throw InvalidArgument("override targets a section, not a value: '" + path + "'");
    *node = value;
}

ExperimentConfig resolve(const json* file, const std::vector<std::string>& overrides) {
    json j = to_json(ExperimentConfig{});
    if (file) {
        if (file->contains("schema_version") && (*file)["schema_version"] != kSchemaVersion) {
            throw InvalidArgument("unsupported schema_version " + (*file)["schema_version"].dump());
        }
        merge_strict(j, *file, "");
    }
    for (const auto& o : overrides) apply_override(j, o);
    ExperimentConfig c;
    try {
        c = from_json(j);
    } catch (const json::exception& e) {
        throw InvalidArgument(std::string("malformed configuration: ") + e.what());
    }
    c.validate();
    return c;
}

}  // namespace

void ExperimentConfig::validate() const {
    if (schema_version != kSchemaVersion) throw InvalidArgument("unsupported schema_version");
    modem.validate();
    for (const auto& k : pulse.kinds) {
        if (k != "rc" && k != "tfl") throw InvalidArgument("unknown pulse kind '" + k + "'");
    }
    if (pulse.kinds.empty()) throw InvalidArgument("no pulse selected");
    if (!(pulse.rolloff > 0.0 && pulse.rolloff <= 1.0)) throw InvalidArgument("rolloff must lie in (0, 1]");
    if (pulse.oversampling < 2 || pulse.span < 1) throw InvalidArgument("invalid pulse grid");
    if (pulse.tfl_route != "continuous" && pulse.tfl_route != "discrete") {
        throw InvalidArgument("tfl_route must be 'continuous' or 'discrete'");
    }
    if (channel.paths < 1 || channel.speed_kmh < 0.0) throw InvalidArgument("invalid channel settings");
    if (pilot_enabled) pilot.validate(modem.M, modem.N);
    if (trials.min_trials < 1 || trials.max_trials < trials.min_trials || trials.batch < 1) {
        throw InvalidArgument("trial counts must satisfy 1 <= min <= max, batch >= 1");
    }
    for (const auto& m : sweep.csi) {
        if (m != "perfect" && m != "estimated") throw InvalidArgument("unknown CSI mode '" + m + "'");
    }
    for (const auto& m : sweep.speed_csi) {
        if (m != "perfect" && m != "estimated") throw InvalidArgument("unknown CSI mode '" + m + "'");
    }
    for (const auto& m : sweep.to_modes) {
        if (m != "awgn" && m != "ltv") throw InvalidArgument("unknown timing-offset mode '" + m + "'");
    }
    for (double d : sweep.to_fracs) SamplingOffset{d};
}

ExperimentConfig parse_config(const std::string& json_text, const std::vector<std::string>& overrides) {
    json file = json::parse(json_text, nullptr, false);
    if (file.is_discarded()) throw InvalidArgument("configuration is not valid JSON");
    return resolve(&file, overrides);
}

ExperimentConfig load_config(const std::string& path, const std::vector<std::string>& overrides) {
    if (path.empty()) return resolve(nullptr, overrides);
    std::ifstream in(path);
    if (!in) throw InvalidArgument("cannot open configuration file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), overrides);
}

std::string config_to_json(const ExperimentConfig& cfg, int indent) { return to_json(cfg).dump(indent); }

std::string config_hash(const ExperimentConfig& cfg) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : config_to_json(cfg)) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace ddsim
