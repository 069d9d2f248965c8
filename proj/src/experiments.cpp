#include "ddsim/experiments.hpp"

#include "ddsim/estimation.hpp"
#include "ddsim/modem.hpp"

#include "json.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <iomanip>
#include <limits>
#include <mutex>
#include <optional>
#include <sstream>
#include <thread>

namespace ddsim {

namespace {

enum class Sweep { Snr, Speed, To };

struct Plan {
    Sweep sweep = Sweep::Snr;
    std::string experiment;
    std::string axis;
    std::string metric;                 // "ber" or "nmse"
    std::vector<double> points;
    std::vector<std::string> modes;
};

struct Outcome {
    bool valid = false;
    long errors = 0;
    long bits = 0;
    double value = 0.0;                 // per-trial BER or NMSE
};

struct Accum {
    long trials = 0;
    long attempts = 0;
    long errors = 0;
    long bits = 0;
    double sum = 0.0;
    double sumsq = 0.0;
    bool done = false;
};

template <class T>
using Grid3 = std::vector<std::vector<std::vector<T>>>;   // [pulse][mode][point]

struct TrialResult {
    Grid3<Outcome> out;
    std::vector<std::string> failures;
};

std::uint64_t value_key(double v) { return std::bit_cast<std::uint64_t>(v); }

PathSet single_unit_path() {
    PathSet ps;
    ps.paths.push_back(Path{});
    return ps;
}

double doppler_bins(const ExperimentConfig& cfg, double speed_kmh) {
    return max_doppler_hz(speed_kmh, cfg.modem.carrier_hz) * cfg.modem.frame_size() * cfg.modem.symbol_period();
}

class Simulation {
public:
    Simulation(const ExperimentConfig& cfg, Plan plan) : cfg_(cfg), plan_(std::move(plan)) {
        cfg_.validate();
        if (plan_.points.empty()) throw InvalidArgument("sweep has no points");
        if (plan_.modes.empty()) throw InvalidArgument("no modes selected");
        for (const auto& k : cfg_.pulse.kinds) pulses_.push_back(make_pulse_model(k, cfg_));

        use_pilot_ = plan_.sweep != Sweep::To && cfg_.pilot_enabled;
        const bool needs_pilot = std::find(plan_.modes.begin(), plan_.modes.end(), "estimated") != plan_.modes.end();
        if (needs_pilot && !use_pilot_) throw InvalidArgument("channel estimation requires the pilot to be enabled");

        const int M = cfg_.modem.M;
        const int N = cfg_.modem.N;
        mask_ = use_pilot_ ? data_mask(cfg_.pilot, M, N) : FrameMask(M, N, true);
        if (use_pilot_) known_ = pilot_frame(cfg_.pilot, M, N).vec();
        nbits_ = 2 * static_cast<std::size_t>(mask_.count());

        // Channels that do not change between trials get one detector per pulse.
        fixed_.resize(pulses_.size());
        for (std::size_t k = 0; k < pulses_.size(); ++k) {
            for (std::size_t m = 0; m < plan_.modes.size(); ++m) {
                if (!fixed_channel(m)) continue;
                auto& f = fixed_[k];
                if (!f.det) {
                    f.H = build_effective_channel(single_unit_path(), pulses_[k].effective, M, N).H;
                    f.det.emplace(f.H, mask_);
                    for (double p : plan_.points) f.solvers.push_back(f.det->prepare(noise_variance(snr_for(p))));
                }
            }
        }
    }

    const Plan& plan() const { return plan_; }
    const std::vector<PulseModel>& pulses() const { return pulses_; }

    TrialResult run_trial(long t, const Grid3<char>& active) const {
        TrialResult res;
        res.out.assign(pulses_.size(),
                       std::vector<std::vector<Outcome>>(plan_.modes.size(), std::vector<Outcome>(plan_.points.size())));

        Rng data_rng(derive_seed(cfg_.seed, static_cast<std::uint64_t>(t), 1));
        const Bits bits = random_bits(nbits_, data_rng);
        DDFrame frame = map_bits(bits, mask_);
        if (use_pilot_) frame = embed_pilot(frame, cfg_.pilot).frame;

        for (std::size_t k = 0; k < pulses_.size(); ++k) {
            try {
                run_pulse(t, k, frame, bits, active, res.out[k]);
            } catch (const NumericalError& e) {
                for (auto& mode : res.out[k]) {
                    for (auto& o : mode) o.valid = false;
                }
                res.failures.push_back("trial " + std::to_string(t) + ", pulse " + pulses_[k].name + ": " + e.what());
            }
        }
        return res;
    }

private:
    struct Fixed {
        CMatrix H;
        std::optional<MmseDetector> det;
        std::vector<MmseDetector::Solver> solvers;
    };

    bool fixed_channel(std::size_t mode) const {
        if (plan_.sweep == Sweep::To) return plan_.modes[mode] == "awgn";
        return cfg_.channel_kind == ChannelKind::Awgn && plan_.modes[mode] == "perfect";
    }

    double snr_for(double point) const {
        switch (plan_.sweep) {
            case Sweep::Snr: return point;
            case Sweep::Speed: return cfg_.sweep.speed_snr_db;
            case Sweep::To: return cfg_.sweep.to_snr_db;
        }
        return point;
    }

    PathSet channel(long t, double speed_kmh, bool fractional) const {
        if (cfg_.channel_kind == ChannelKind::Awgn) return single_unit_path();
        Rng rng(derive_seed(cfg_.seed, static_cast<std::uint64_t>(t), 0));
        ChannelConfig cc = cfg_.channel;
        cc.speed_kmh = speed_kmh;
        cc.fractional_delay = fractional;
        cc.carrier_hz = cfg_.modem.carrier_hz;
        return generate_channel(cc, cfg_.modem.symbol_period(), rng);
    }

    CVector chain(const DDFrame& frame, const PathSet& ps, const PulseModel& pm, SamplingOffset off) const {
        const Waveform tx = transmit(frame, cfg_.modem, pm.prototype);
        return receive(apply_channel_waveform(tx, ps), cfg_.modem, pm.prototype, off).vec();
    }

    long count_errors(const CVector& symbols, const Bits& bits) const {
        const Bits dec = demap(symbols);
        long e = 0;
        for (std::size_t i = 0; i < dec.size(); ++i) e += dec[i] != bits[i];
        return e;
    }

    // Keyed on the SNR, so every point of a speed or offset sweep sees the same noise.
    CVector noisy(const CVector& z0, long t, double point) const {
        CVector z = z0;
        const double snr = snr_for(point);
        Rng rng(derive_seed(cfg_.seed, static_cast<std::uint64_t>(t), 2, value_key(snr)));
        add_awgn(z, snr, rng);
        return z;
    }

    std::optional<CVector> known() const {
        if (use_pilot_) return known_;
        return std::nullopt;
    }

    // Perfect or estimated CSI detection at one point.
    void detect_point(long t, std::size_t k, std::size_t p, const CVector& z0, const CMatrix& H,
                      std::optional<MmseDetector>& det, double speed_kmh, const Bits& bits,
                      const Grid3<char>& active, std::vector<std::vector<Outcome>>& out) const {
        const CVector z = noisy(z0, t, plan_.points[p]);
        const double s2 = noise_variance(snr_for(plan_.points[p]));
        const long nb = static_cast<long>(bits.size());
        for (std::size_t m = 0; m < plan_.modes.size(); ++m) {
            if (!active[k][m][p]) continue;
            Outcome& o = out[m][p];
            if (plan_.modes[m] == "perfect") {
                CVector dhat;
                if (fixed_channel(m)) {
                    dhat = fixed_[k].det->detect(fixed_[k].solvers[p], z, known());
                } else {
                    if (!det) det.emplace(H, mask_);
                    dhat = det->detect(det->prepare(s2), z, known());
                }
                o.errors = count_errors(dhat, bits);
                o.bits = nb;
                o.value = static_cast<double>(o.errors) / static_cast<double>(nb);
            } else {
                PilotLayout layout = cfg_.pilot;
                layout.max_doppler_bins = doppler_bins(cfg_, speed_kmh);
                const ChannelEstimate est =
                    estimate_channel(DDFrame::from_vec(z, cfg_.modem.M, cfg_.modem.N), layout, s2);
                if (plan_.metric == "nmse") {
                    o.value = nmse(est.H, H);
                } else {
                    const MmseDetector edet(est.H, mask_);
                    o.errors = count_errors(edet.detect(edet.prepare(s2), z, known()), bits);
                    o.bits = nb;
                    o.value = static_cast<double>(o.errors) / static_cast<double>(nb);
                }
            }
            o.valid = true;
        }
    }

    static bool any_active(const Grid3<char>& a, std::size_t k, std::size_t p) {
        for (const auto& mode : a[k]) {
            if (mode[p]) return true;
        }
        return false;
    }

    void run_pulse(long t, std::size_t k, const DDFrame& frame, const Bits& bits, const Grid3<char>& active,
                   std::vector<std::vector<Outcome>>& out) const {
        const PulseModel& pm = pulses_[k];
        const int M = cfg_.modem.M;
        const int N = cfg_.modem.N;
        const std::size_t P = plan_.points.size();

        switch (plan_.sweep) {
            case Sweep::Snr: {
                bool any = false;
                for (std::size_t p = 0; p < P; ++p) any = any || any_active(active, k, p);
                if (!any) return;
                const double speed = cfg_.channel.speed_kmh;
                const PathSet ps = channel(t, speed, cfg_.channel.fractional_delay);
                const CMatrix H = cfg_.channel_kind == ChannelKind::Awgn && fixed_[k].det
                                      ? fixed_[k].H
                                      : build_effective_channel(ps, pm.effective, M, N).H;
                const CVector z0 = chain(frame, ps, pm, {});
                std::optional<MmseDetector> det;
                for (std::size_t p = 0; p < P; ++p) {
                    if (any_active(active, k, p)) detect_point(t, k, p, z0, H, det, speed, bits, active, out);
                }
                return;
            }
            case Sweep::Speed: {
                for (std::size_t p = 0; p < P; ++p) {
                    if (!any_active(active, k, p)) continue;
                    const double speed = plan_.points[p];
                    const PathSet ps = channel(t, speed, cfg_.channel.fractional_delay);
                    const CMatrix H = build_effective_channel(ps, pm.effective, M, N).H;
                    const CVector z0 = chain(frame, ps, pm, {});
                    std::optional<MmseDetector> det;
                    detect_point(t, k, p, z0, H, det, speed, bits, active, out);
                }
                return;
            }
            case Sweep::To: {
                const double s2 = noise_variance(cfg_.sweep.to_snr_db);
                for (std::size_t m = 0; m < plan_.modes.size(); ++m) {
                    bool any = false;
                    for (std::size_t p = 0; p < P; ++p) any = any || active[k][m][p];
                    if (!any) continue;
                    const bool awgn = plan_.modes[m] == "awgn";
                    const PathSet ps = awgn ? single_unit_path() : channel(t, cfg_.sweep.to_ltv_speed_kmh, false);
                    std::optional<MmseDetector> det;
                    std::optional<MmseDetector::Solver> solver;
                    if (!awgn) {
                        det.emplace(build_effective_channel(ps, pm.effective, M, N).H, mask_);
                        solver.emplace(det->prepare(s2));
                    }
                    for (std::size_t p = 0; p < P; ++p) {
                        if (!active[k][m][p]) continue;
                        const CVector z = noisy(chain(frame, ps, pm, SamplingOffset(plan_.points[p])), t, plan_.points[p]);
                        const CVector dhat = awgn ? fixed_[k].det->detect(fixed_[k].solvers[p], z)
                                                  : det->detect(*solver, z);
                        Outcome& o = out[m][p];
                        o.errors = count_errors(dhat, bits);
                        o.bits = static_cast<long>(bits.size());
                        o.value = static_cast<double>(o.errors) / static_cast<double>(o.bits);
                        o.valid = true;
                    }
                }
                return;
            }
        }
    }

    ExperimentConfig cfg_;
    Plan plan_;
    std::vector<PulseModel> pulses_;
    bool use_pilot_ = false;
    FrameMask mask_{1, 1};
    CVector known_;
    std::size_t nbits_ = 0;
    std::vector<Fixed> fixed_;
};

void parallel_for(long n, int workers, const std::function<void(long)>& fn) {
    if (workers <= 1 || n <= 1) {
        for (long i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<long> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> threads;
    const int count = static_cast<int>(std::min<long>(workers, n));
    threads.reserve(static_cast<std::size_t>(count));
    for (int w = 0; w < count; ++w) {
        threads.emplace_back([&] {
            for (long i = next++; i < n; i = next++) {
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard lock(error_mutex);
                    if (!error) error = std::current_exception();
                    next = n;
                }
            }
        });
    }
    for (auto& th : threads) th.join();
    if (error) std::rethrow_exception(error);
}

RunSummary run_plan(const ExperimentConfig& cfg, Plan plan) {
    const Simulation sim(cfg, std::move(plan));
    const Plan& pl = sim.plan();
    const std::size_t K = sim.pulses().size();
    const std::size_t Mo = pl.modes.size();
    const std::size_t P = pl.points.size();
    const auto& tr = cfg.trials;
    const bool ber = pl.metric == "ber";

    Grid3<Accum> acc(K, std::vector<std::vector<Accum>>(Mo, std::vector<Accum>(P)));
    RunSummary summary;
    summary.experiment = pl.experiment;
    summary.sweep_axis = pl.axis;
    const int workers = worker_count();

    long next_trial = 0;
    while (true) {
        Grid3<char> active(K, std::vector<std::vector<char>>(Mo, std::vector<char>(P, 0)));
        bool any = false;
        for (std::size_t k = 0; k < K; ++k) {
            for (std::size_t m = 0; m < Mo; ++m) {
                for (std::size_t p = 0; p < P; ++p) {
                    active[k][m][p] = acc[k][m][p].done ? 0 : 1;
                    any = any || !acc[k][m][p].done;
                }
            }
        }
        if (!any) break;

        const long batch = tr.batch;
        std::vector<TrialResult> results(static_cast<std::size_t>(batch));
        parallel_for(batch, workers, [&](long i) {
            results[static_cast<std::size_t>(i)] = sim.run_trial(next_trial + i, active);
        });

        // Ordered reduction keeps the totals independent of the worker count.
        for (const auto& r : results) {
            summary.numerical_failures += static_cast<long>(r.failures.size());
            for (const auto& f : r.failures) {
                if (summary.failure_messages.size() < 10) summary.failure_messages.push_back(f);
            }
            for (std::size_t k = 0; k < K; ++k) {
                for (std::size_t m = 0; m < Mo; ++m) {
                    for (std::size_t p = 0; p < P; ++p) {
                        if (!active[k][m][p]) continue;
                        Accum& a = acc[k][m][p];
                        if (a.done) continue;
                        ++a.attempts;
                        const Outcome& o = r.out[k][m][p];
                        if (o.valid) {
                            ++a.trials;
                            a.errors += o.errors;
                            a.bits += o.bits;
                            a.sum += o.value;
                            a.sumsq += o.value * o.value;
                        }
                        const bool enough = a.trials >= tr.min_trials && (!ber || a.errors >= tr.target_errors);
                        if (enough || a.attempts >= tr.max_trials) a.done = true;
                    }
                }
            }
        }
        next_trial += batch;
    }

    const std::string hash = config_hash(cfg);
    for (std::size_t k = 0; k < K; ++k) {
        for (std::size_t m = 0; m < Mo; ++m) {
            for (std::size_t p = 0; p < P; ++p) {
                const Accum& a = acc[k][m][p];
                ResultRecord r;
                r.sweep_value = pl.points[p];
                r.metric = pl.metric;
                r.trials = a.trials;
                r.pulse = sim.pulses()[k].name;
                r.mode = pl.modes[m];
                r.seed = cfg.seed;
                r.config_hash = hash;
                r.errors = a.errors;
                r.bits = a.bits;
                if (a.trials > 0) {
                    const double n = static_cast<double>(a.trials);
                    r.mean = ber ? static_cast<double>(a.errors) / static_cast<double>(a.bits) : a.sum / n;
                    if (a.trials > 1) {
                        const double mu = a.sum / n;
                        const double var = std::max(0.0, (a.sumsq - n * mu * mu) / (n - 1.0));
                        r.stderr_ = std::sqrt(var / n);
                    }
                }
                r.flagged = ber && a.errors < tr.flag_errors;
                summary.records.push_back(r);
            }
        }
    }
    return summary;
}

std::string format_double(double v) {
    std::ostringstream os;
    os << std::setprecision(12) << v;
    return os.str();
}

}  // namespace

PulseModel make_pulse_model(const std::string& kind, const ExperimentConfig& cfg) {
    const auto& ps = cfg.pulse;
    const double Ts = cfg.modem.symbol_period();
    if (kind == "rc") {
        PulsePrototype p = srrc_prototype(ps.rolloff, ps.oversampling, ps.span, Ts);
        EffectivePulse g = effective_pulse(p);
        return {"rc", std::move(p), std::move(g)};
    }
    if (kind == "tfl") {
        const double scale =
            ps.tfl_scale > 0.0 ? ps.tfl_scale : calibrate_tfl_scale(ps.tfl_coeffs, ps.oversampling, ps.span).scale;
        TflOptions opt;
        opt.route = ps.tfl_route == "discrete" ? HermiteRoute::Discrete : HermiteRoute::Continuous;
        PulsePrototype p = tfl_prototype(ps.tfl_coeffs, scale, ps.oversampling, ps.span, Ts, opt);
        EffectivePulse g = effective_pulse(p);
        return {"tfl", std::move(p), std::move(g)};
    }
    throw InvalidArgument("unknown pulse kind '" + kind + "'");
}

int worker_count() {
    if (const char* env = std::getenv("DDSIM_WORKERS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v > 0) return static_cast<int>(std::min<long>(v, 256));
    }
    const unsigned hc = std::thread::hardware_concurrency();
    return hc == 0 ? 1 : static_cast<int>(hc);
}

RunSummary run_ber_vs_snr(const ExperimentConfig& cfg) {
    return run_plan(cfg, {Sweep::Snr, "ber-snr", "snr_db", "ber", cfg.sweep.snr_db, cfg.sweep.csi});
}

RunSummary run_nmse_vs_snr(const ExperimentConfig& cfg) {
    return run_plan(cfg, {Sweep::Snr, "nmse-snr", "snr_db", "nmse", cfg.sweep.snr_db, {"estimated"}});
}

RunSummary run_ber_vs_speed(const ExperimentConfig& cfg) {
    return run_plan(cfg, {Sweep::Speed, "ber-speed", "speed_kmh", "ber", cfg.sweep.speeds_kmh, cfg.sweep.speed_csi});
}

RunSummary run_ber_vs_to(const ExperimentConfig& cfg) {
    return run_plan(cfg, {Sweep::To, "ber-to", "to_frac", "ber", cfg.sweep.to_fracs, cfg.sweep.to_modes});
}

std::vector<ResultRecord> select(const RunSummary& s, const std::string& pulse, const std::string& mode) {
    std::vector<ResultRecord> out;
    for (const auto& r : s.records) {
        if (r.pulse == pulse && r.mode == mode) out.push_back(r);
    }
    std::sort(out.begin(), out.end(),
              [](const ResultRecord& a, const ResultRecord& b) { return a.sweep_value < b.sweep_value; });
    return out;
}

double snr_at_ber(const std::vector<ResultRecord>& curve, double level) {
    if (curve.empty() || !(level > 0.0)) return std::numeric_limits<double>::quiet_NaN();
    for (std::size_t i = 0; i < curve.size(); ++i) {
        if (curve[i].mean > level) continue;
        if (i == 0) return curve[0].sweep_value;
        const auto& a = curve[i - 1];
        const auto& b = curve[i];
        double f;
        if (b.mean > 0.0) {
            f = (std::log10(a.mean) - std::log10(level)) / (std::log10(a.mean) - std::log10(b.mean));
        } else {
            f = (a.mean - level) / (a.mean - b.mean);
        }
        return a.sweep_value + f * (b.sweep_value - a.sweep_value);
    }
    if (curve.size() >= 2) {
        const auto& a = curve[curve.size() - 2];
        const auto& b = curve.back();
        if (a.mean > b.mean && b.mean > 0.0) {
            const double slope = (std::log10(b.mean) - std::log10(a.mean)) / (b.sweep_value - a.sweep_value);
            return b.sweep_value + (std::log10(level) - std::log10(b.mean)) / slope;
        }
    }
    return std::numeric_limits<double>::infinity();
}

double snr_gap_db(const std::vector<ResultRecord>& rc, const std::vector<ResultRecord>& tfl) {
    if (rc.empty() || tfl.empty()) return std::numeric_limits<double>::quiet_NaN();
    const double level = tfl.back().mean;
    return snr_at_ber(rc, level) - snr_at_ber(tfl, level);
}

std::vector<PulseDumpRow> dump_pulse_response(const ExperimentConfig& cfg) {
    cfg.validate();
    const auto& d = cfg.pulse_dump;
    if (d.points_per_symbol < 1 || !(d.t_max > d.t_min)) throw InvalidArgument("invalid pulse-dump grid");
    std::vector<PulseDumpRow> rows;
    const long j0 = static_cast<long>(std::ceil(d.t_min * d.points_per_symbol));
    const long j1 = static_cast<long>(std::floor(d.t_max * d.points_per_symbol));
    for (const auto& kind : cfg.pulse.kinds) {
        const PulseModel pm = make_pulse_model(kind, cfg);
        for (std::size_t i = 0; i < d.delays.size(); ++i) {
            for (long j = j0; j <= j1; ++j) {
                PulseDumpRow r;
                r.pulse = pm.name;
                r.path = static_cast<int>(i);
                r.delay = d.delays[i];
                r.t = static_cast<double>(j) / d.points_per_symbol;
                r.value = pm.effective.at_symbols(r.t - r.delay);
                r.sampled = j % d.points_per_symbol == 0;
                rows.push_back(r);
            }
        }
    }
    return rows;
}

double energy_outside_delay_band(const CMatrix& grid, int centre_row, int half) {
    const auto M = static_cast<int>(grid.rows());
    const double total = grid.squaredNorm();
    if (total == 0.0) return 0.0;
    double inside = 0.0;
    for (int r = centre_row - half; r <= centre_row + half; ++r) inside += grid.row(((r % M) + M) % M).squaredNorm();
    return std::max(0.0, 1.0 - inside / total);
}

std::vector<SpreadPanel> dump_dd_spread(const ExperimentConfig& cfg) {
    cfg.validate();
    const auto& sp = cfg.spread;
    const int M = cfg.modem.M;
    const int N = cfg.modem.N;
    const double Ts = cfg.modem.symbol_period();
    PathSet ps;
    Path path;
    path.delay = sp.delay_symbols * Ts;
    path.doppler = sp.doppler_bins * cfg.modem.doppler_resolution();
    ps.paths.push_back(path);
    const int centre = sp.input_row + static_cast<int>(std::lround(sp.delay_symbols));

    std::vector<SpreadPanel> panels;
    auto add = [&](const std::string& label, const EffectivePulse& g) {
        const auto Hm = build_effective_channel(ps, g, M, N);
        SpreadPanel panel;
        panel.label = label;
        panel.response = impulse_response(Hm, sp.input_row, sp.input_col);
        panel.outside_fraction = energy_outside_delay_band(panel.response, centre, sp.neighbourhood);
        panels.push_back(std::move(panel));
    };
    for (const auto& kind : cfg.pulse.kinds) {
        if (kind == "rc") {
            for (double beta : sp.rolloffs) {
                add("rc_beta=" + format_double(beta),
                    rc_effective_pulse(beta, cfg.pulse.oversampling, cfg.pulse.span, Ts));
            }
        } else {
            add(kind, make_pulse_model(kind, cfg).effective);
        }
    }
    return panels;
}

void write_results_csv(std::ostream& os, const std::vector<ResultRecord>& records) {
    os << "sweep_value,metric,mean,stderr,trials,pulse,mode,seed,config_hash\n";
    for (const auto& r : records) {
        os << format_double(r.sweep_value) << ',' << r.metric << ',' << format_double(r.mean) << ','
           << format_double(r.stderr_) << ',' << r.trials << ',' << r.pulse << ',' << r.mode << ',' << r.seed << ','
           << r.config_hash << '\n';
    }
}

void write_summary_json(std::ostream& os, const RunSummary& s, const ExperimentConfig& cfg) {
    nlohmann::json j;
    j["experiment"] = s.experiment;
    j["sweep_axis"] = s.sweep_axis;
    j["seed"] = cfg.seed;
    j["config_hash"] = config_hash(cfg);
    j["config"] = nlohmann::json::parse(config_to_json(cfg));
    j["numerical_failures"] = s.numerical_failures;
    j["failure_messages"] = s.failure_messages;
    nlohmann::json recs = nlohmann::json::array();
    nlohmann::json flagged = nlohmann::json::array();
    for (const auto& r : s.records) {
        nlohmann::json e = {{"sweep_value", r.sweep_value}, {"metric", r.metric}, {"mean", r.mean},
                            {"stderr", r.stderr_},          {"trials", r.trials}, {"pulse", r.pulse},
                            {"mode", r.mode},               {"errors", r.errors}, {"bits", r.bits},
                            {"flagged", r.flagged}};
        if (r.flagged) flagged.push_back({{"pulse", r.pulse}, {"mode", r.mode}, {"sweep_value", r.sweep_value}});
        recs.push_back(std::move(e));
    }
    j["records"] = std::move(recs);
    j["flagged_points"] = std::move(flagged);
    os << j.dump(2) << '\n';
}

void write_pulse_dump_csv(std::ostream& os, const std::vector<PulseDumpRow>& rows) {
    os << "pulse,path,delay_over_Ts,t_over_Ts,g_value,sampled\n";
    for (const auto& r : rows) {
        os << r.pulse << ',' << r.path << ',' << format_double(r.delay) << ',' << format_double(r.t) << ','
           << format_double(r.value) << ',' << (r.sampled ? 1 : 0) << '\n';
    }
}

void write_spread_csv(std::ostream& os, const std::vector<SpreadPanel>& panels) {
    os << "pulse,delay_bin,doppler_bin,magnitude\n";
    for (const auto& p : panels) {
        for (Eigen::Index n = 0; n < p.response.cols(); ++n) {
            for (Eigen::Index m = 0; m < p.response.rows(); ++m) {
                os << p.label << ',' << m << ',' << n << ',' << format_double(std::abs(p.response(m, n))) << '\n';
            }
        }
    }
}

void write_spread_json(std::ostream& os, const std::vector<SpreadPanel>& panels, const ExperimentConfig& cfg) {
    nlohmann::json j;
    j["experiment"] = "dd-spread";
    j["config_hash"] = config_hash(cfg);
    j["delay_symbols"] = cfg.spread.delay_symbols;
    j["doppler_bins"] = cfg.spread.doppler_bins;
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& p : panels) arr.push_back({{"pulse", p.label}, {"outside_fraction", p.outside_fraction}});
    j["panels"] = std::move(arr);
    os << j.dump(2) << '\n';
}

}  // namespace ddsim
