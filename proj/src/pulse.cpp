#include "ddsim/pulse.hpp"

#include "ddsim/detail/interp.hpp"

#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace ddsim {

namespace {

constexpr double kSingularityTol = 1e-8;

double sinc(double x) {
    if (std::abs(x) < 1e-12) return 1.0;
    return std::sin(kPi * x) / (kPi * x);
}

void check_grid(int oversampling, int span, double symbol_period) {
    if (oversampling < 1 || span < 1 || !(symbol_period > 0.0)) {
        throw InvalidArgument("pulse grid needs oversampling >= 1, span >= 1, symbol_period > 0");
    }
}

void normalize_energy(std::vector<double>& p, double step) {
    double e = 0.0;
    for (double v : p) e += v * v;
    e *= step;
    if (!(e > 0.0) || !std::isfinite(e)) {
        throw NumericalError("pulse prototype has zero or non-finite energy");
    }
    const double s = 1.0 / std::sqrt(e);
    for (double& v : p) v *= s;
}

// Sign changes of a vector, ignoring entries below `rel` of the peak.
int sign_changes(const RVector& v, double rel = 1e-6) {
    const double thr = v.cwiseAbs().maxCoeff() * rel;
    int changes = 0;
    int last = 0;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (std::abs(v[i]) <= thr) continue;
        const int s = v[i] > 0 ? 1 : -1;
        if (last != 0 && s != last) ++changes;
        last = s;
    }
    return changes;
}

// Eigenpairs with (1-based, ascending) indices il..iu of the tridiagonal matrix.
void tridiagonal_eigen(const RVector& diag, const RVector& off, int il, int iu, RVector& values,
                       RMatrix& vectors) {
    const lapack_int n = static_cast<lapack_int>(diag.size());
    std::vector<double> d(diag.data(), diag.data() + n);
    std::vector<double> e(static_cast<std::size_t>(n), 0.0);
    std::copy(off.data(), off.data() + off.size(), e.begin());
    const lapack_int want = iu - il + 1;
    std::vector<double> w(static_cast<std::size_t>(n));
    std::vector<double> z(static_cast<std::size_t>(n) * want);
    std::vector<lapack_int> isuppz(2 * static_cast<std::size_t>(want));
    lapack_int found = 0;
    const char range = (il == 1 && iu == n) ? 'A' : 'I';
    const lapack_int info =
        LAPACKE_dstevr(LAPACK_COL_MAJOR, 'V', range, n, d.data(), e.data(), 0.0, 0.0, il, iu, 0.0,
                       &found, w.data(), z.data(), n, isuppz.data());
    if (info != 0 || found != want) {
        throw NumericalError("tridiagonal eigendecomposition failed (info=" + std::to_string(info) +
                             ", found " + std::to_string(found) + " of " + std::to_string(want) +
                             ")");
    }
    values = Eigen::Map<RVector>(w.data(), want);
    vectors = Eigen::Map<RMatrix>(z.data(), n, want);
}

double integer_lag_leakage(const std::vector<double>& p, int oversampling, int span) {
    // Autocorrelation at lags kQ only; g(0) = 1 after unit-energy normalization
    // up to the common step factor, which cancels in the ratio.
    const int L = static_cast<int>(p.size());
    double g0 = 0.0;
    for (double v : p) g0 += v * v;
    double acc = 0.0;
    for (int k = 1; k <= 2 * span; ++k) {
        const int lag = k * oversampling;
        if (lag >= L) break;
        double g = 0.0;
        for (int i = 0; i + lag < L; ++i) g += p[i] * p[i + lag];
        g /= g0;
        acc += 2.0 * g * g;
    }
    return acc;
}

}  // namespace

const char* to_string(PulseKind kind) {
    switch (kind) {
        case PulseKind::Srrc: return "srrc";
        case PulseKind::TflHermite: return "tfl";
        case PulseKind::Custom: return "custom";
    }
    return "unknown";
}

TflCoefficients default_tfl_coefficients() {
    constexpr std::array<double, kTflTerms> a = {1.412692577, -3.0145e-3, -8.8041e-6, -2.2611e-9,
                                                 -4.4570e-15};
    TflCoefficients d{};
    for (int i = 0; i < kTflTerms; ++i) {
        const int k = 4 * i;
        const double norm = std::sqrt(std::pow(2.0, k) * std::tgamma(k + 1.0) * std::sqrt(kPi));
        d[static_cast<std::size_t>(i)] = a[static_cast<std::size_t>(i)] * norm;
    }
    return d;
}

double natural_tfl_scale() { return 1.0 / (2.0 * std::sqrt(kPi)); }

double PulsePrototype::energy() const {
    double e = 0.0;
    for (double v : samples) e += v * v;
    return e * fine_step();
}

std::string PulsePrototype::label() const {
    std::ostringstream os;
    switch (kind) {
        case PulseKind::Srrc: os << "rc(" << rolloff << ")"; break;
        case PulseKind::TflHermite: os << "tfl"; break;
        case PulseKind::Custom: os << "custom"; break;
    }
    return os.str();
}

// ---------------------------------------------------------------------------
// EffectivePulse

EffectivePulse::EffectivePulse(std::vector<double> samples, int oversampling, double symbol_period,
                               std::string label)
    : samples_(std::move(samples)),
      oversampling_(oversampling),
      half_len_(0),
      symbol_period_(symbol_period),
      label_(std::move(label)) {
    if (samples_.empty() || samples_.size() % 2 == 0) {
        throw InvalidArgument("effective pulse needs an odd, centred sample vector");
    }
    if (oversampling_ < 1 || !(symbol_period_ > 0.0)) {
        throw InvalidArgument("effective pulse needs oversampling >= 1 and symbol_period > 0");
    }
    half_len_ = static_cast<int>(samples_.size() / 2);
    const double peak = samples_[static_cast<std::size_t>(half_len_)];
    if (!(std::abs(peak) > 0.0) || !std::isfinite(peak)) {
        throw NumericalError("effective pulse has zero or non-finite peak");
    }
    for (double& v : samples_) v /= peak;
}

double EffectivePulse::at_symbols(double x) const {
    const double pos = x * oversampling_ + half_len_;
    const auto n = static_cast<long>(samples_.size());
    if (pos < 0.0 || pos > static_cast<double>(n - 1)) return 0.0;
    return detail::cubic_at(samples_, n, pos);
}

// ---------------------------------------------------------------------------
// Closed forms

double srrc_value(double t, double rolloff, double symbol_period) {
    if (!(rolloff > 0.0 && rolloff <= 1.0)) {
        throw InvalidArgument("SRRC roll-off must lie in (0, 1]");
    }
    const double b = rolloff;
    const double x = t / symbol_period;
    const double amp = 1.0 / std::sqrt(symbol_period);
    if (std::abs(x) < kSingularityTol) {
        return amp * (1.0 - b + 4.0 * b / kPi);
    }
    if (std::abs(std::abs(x) - 1.0 / (4.0 * b)) < kSingularityTol) {
        const double a = kPi / (4.0 * b);
        return amp * b / std::sqrt(2.0) *
               ((1.0 + 2.0 / kPi) * std::sin(a) + (1.0 - 2.0 / kPi) * std::cos(a));
    }
    const double f = std::cos((1.0 + b) * kPi * x) + std::sin((1.0 - b) * kPi * x) / (4.0 * b * x);
    const double q = 4.0 * b * x;
    return amp * 4.0 * b / kPi * f / (1.0 - q * q);
}

double rc_value(double t, double rolloff, double symbol_period) {
    if (!(rolloff >= 0.0 && rolloff <= 1.0)) {
        throw InvalidArgument("RC roll-off must lie in [0, 1]");
    }
    const double b = rolloff;
    const double x = t / symbol_period;
    if (std::abs(x) < kSingularityTol) return 1.0;
    if (b > 0.0 && std::abs(std::abs(x) - 1.0 / (2.0 * b)) < kSingularityTol) {
        return kPi / 4.0 * sinc(1.0 / (2.0 * b));
    }
    const double q = 2.0 * b * x;
    return sinc(x) * std::cos(kPi * b * x) / (1.0 - q * q);
}

double hermite_function(int order, double x) {
    if (order < 0) throw InvalidArgument("Hermite order must be nonnegative");
    double prev = std::pow(kPi, -0.25) * std::exp(-0.5 * x * x);
    if (order == 0) return prev;
    double cur = std::sqrt(2.0) * x * prev;
    for (int n = 1; n < order; ++n) {
        const double next = std::sqrt(2.0 / (n + 1)) * x * cur - std::sqrt(static_cast<double>(n) / (n + 1)) * prev;
        prev = cur;
        cur = next;
    }
    return cur;
}

// ---------------------------------------------------------------------------
// Discrete Gaussian-Hermite functions

double DiscreteHermiteBasis::grid_step() const {
    return std::sqrt(2.0 * kPi / (static_cast<double>(size) * sigma * sigma));
}

DiscreteHermiteBasis discrete_hermite(int size, double sigma, int count) {
    if (size < 8) throw InvalidArgument("discrete Hermite basis needs at least 8 points");
    if (!(sigma > 0.0)) throw InvalidArgument("discrete Hermite width sigma must be positive");
    if (count < 0 || count > size) count = size;

    const double a = kPi / (static_cast<double>(size) * sigma * sigma);
    const double c = std::cos(kPi / (sigma * sigma));
    RVector diag(size);
    RVector off(size - 1);
    for (int k = 0; k < size; ++k) {
        diag[k] = -2.0 * c * std::sin(a * k) * std::sin(a * ((size - 1) - k));
    }
    for (int k = 1; k < size; ++k) {
        off[k - 1] = std::sin(a * k) * std::sin(a * (size - k));
    }

    // The Gaussian-like eigenvector sits at one end of the spectrum; which end
    // depends on the sign of cos(pi / sigma^2).
    RVector w_lo, w_hi;
    RMatrix v_lo, v_hi;
    tridiagonal_eigen(diag, off, 1, 1, w_lo, v_lo);
    tridiagonal_eigen(diag, off, size, size, w_hi, v_hi);
    const bool descending = sign_changes(v_hi.col(0)) <= sign_changes(v_lo.col(0));

    RVector values;
    RMatrix vectors;
    if (descending) {
        tridiagonal_eigen(diag, off, size - count + 1, size, values, vectors);
        values.reverseInPlace();
        vectors.rowwise().reverseInPlace();
    } else {
        tridiagonal_eigen(diag, off, 1, count, values, vectors);
    }

    for (Eigen::Index p = 0; p < vectors.cols(); ++p) {
        Eigen::Index imax = 0;
        vectors.col(p).cwiseAbs().maxCoeff(&imax);
        if (vectors(imax, p) < 0.0) vectors.col(p) *= -1.0;
    }

    DiscreteHermiteBasis basis;
    basis.size = size;
    basis.sigma = sigma;
    basis.vectors = std::move(vectors);
    basis.eigenvalues = std::move(values);
    return basis;
}

// ---------------------------------------------------------------------------
// Prototypes

PulsePrototype srrc_prototype(double rolloff, int oversampling, int span, double symbol_period) {
    check_grid(oversampling, span, symbol_period);
    PulsePrototype p;
    p.kind = PulseKind::Srrc;
    p.rolloff = rolloff;
    p.oversampling = oversampling;
    p.span = span;
    p.symbol_period = symbol_period;
    const int half = span * oversampling;
    p.samples.resize(static_cast<std::size_t>(2 * half + 1));
    for (int k = -half; k <= half; ++k) {
        const double t = static_cast<double>(k) / oversampling * symbol_period;
        p.samples[static_cast<std::size_t>(k + half)] = srrc_value(t, rolloff, symbol_period);
    }
    normalize_energy(p.samples, p.fine_step());
    return p;
}

PulsePrototype tfl_prototype(const TflCoefficients& coeffs, double scale, int oversampling,
                             int span, double symbol_period, const TflOptions& options) {
    check_grid(oversampling, span, symbol_period);
    if (std::all_of(coeffs.begin(), coeffs.end(), [](double c) { return c == 0.0; })) {
        throw InvalidArgument("TFL coefficients are all zero");
    }
    if (!(scale > 0.0)) throw InvalidArgument("TFL scale must be positive");

    PulsePrototype p;
    p.kind = PulseKind::TflHermite;
    p.coeffs = coeffs;
    p.scale = scale;
    p.oversampling = oversampling;
    p.span = span;
    p.symbol_period = symbol_period;
    const int half = span * oversampling;
    p.samples.assign(static_cast<std::size_t>(2 * half + 1), 0.0);

    auto dimensionless = [&](int k) { return static_cast<double>(k) / oversampling / scale; };

    if (options.route == HermiteRoute::Continuous) {
        for (int k = -half; k <= half; ++k) {
            const double x = dimensionless(k);
            double v = 0.0;
            for (int i = 0; i < kTflTerms; ++i) {
                if (coeffs[static_cast<std::size_t>(i)] != 0.0) {
                    v += coeffs[static_cast<std::size_t>(i)] * hermite_function(4 * i, x);
                }
            }
            p.samples[static_cast<std::size_t>(k + half)] = v;
        }
    } else {
        const int size = options.discrete_size > 0 ? options.discrete_size : 2 * half + 1;
        const auto basis = discrete_hermite(size, options.discrete_sigma, 4 * (kTflTerms - 1) + 1);
        const double h = basis.grid_step();
        const double centre = 0.5 * (size - 1);
        const double amp = 1.0 / std::sqrt(h);  // unit l2 column -> unit L2 function
        for (int k = -half; k <= half; ++k) {
            const double pos = dimensionless(k) / h + centre;
            double v = 0.0;
            for (int i = 0; i < kTflTerms; ++i) {
                if (coeffs[static_cast<std::size_t>(i)] == 0.0) continue;
                const auto col = basis.vectors.col(4 * i);
                v += coeffs[static_cast<std::size_t>(i)] * amp * detail::cubic_at(col, size, pos);
            }
            p.samples[static_cast<std::size_t>(k + half)] = v;
        }
    }
    normalize_energy(p.samples, p.fine_step());
    return p;
}

ScaleCalibration calibrate_tfl_scale(const TflCoefficients& coeffs, int oversampling, int span,
                                     double lo, double hi) {
    if (lo <= 0.0) lo = 0.85 * natural_tfl_scale();
    if (hi <= 0.0) hi = 1.15 * natural_tfl_scale();
    if (!(hi > lo)) throw InvalidArgument("calibration bracket must satisfy lo < hi");

    auto cost = [&](double s) {
        const auto p = tfl_prototype(coeffs, s, oversampling, span, 1.0);
        return integer_lag_leakage(p.samples, oversampling, span);
    };

    // Golden-section search.
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = lo, b = hi;
    double c = b - inv_phi * (b - a);
    double d = a + inv_phi * (b - a);
    double fc = cost(c), fd = cost(d);
    while (b - a > 1e-10) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = cost(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = cost(d);
        }
    }
    const double s = 0.5 * (a + b);
    return ScaleCalibration{s, cost(s)};
}

EffectivePulse effective_pulse(const PulsePrototype& prototype) {
    const auto& p = prototype.samples;
    const int L = static_cast<int>(p.size());
    if (L == 0) throw InvalidArgument("empty pulse prototype");
    std::vector<double> g(static_cast<std::size_t>(2 * L - 1), 0.0);
    const double step = prototype.fine_step();
    for (int lag = 0; lag < L; ++lag) {
        double acc = 0.0;
        for (int i = 0; i + lag < L; ++i) acc += p[static_cast<std::size_t>(i)] * p[static_cast<std::size_t>(i + lag)];
        acc *= step;
        g[static_cast<std::size_t>(L - 1 + lag)] = acc;
        g[static_cast<std::size_t>(L - 1 - lag)] = acc;
    }
    return EffectivePulse(std::move(g), prototype.oversampling, prototype.symbol_period,
                          prototype.label());
}

EffectivePulse rc_effective_pulse(double rolloff, int oversampling, int span, double symbol_period) {
    check_grid(oversampling, span, symbol_period);
    const int half = 2 * span * oversampling;
    std::vector<double> g(static_cast<std::size_t>(2 * half + 1));
    for (int k = -half; k <= half; ++k) {
        g[static_cast<std::size_t>(k + half)] = rc_value(static_cast<double>(k) / oversampling, rolloff, 1.0);
    }
    std::ostringstream label;
    label << "rc(" << rolloff << ")";
    return EffectivePulse(std::move(g), oversampling, symbol_period, label.str());
}

RVector sample_shifted(const EffectivePulse& g, double tau, int len) {
    if (len < 1) throw InvalidArgument("sample_shifted needs len >= 1");
    RVector out(len);
    const double Ts = g.symbol_period();
    for (int k = 0; k < len; ++k) out[k] = g.at_symbols(k - tau / Ts);
    return out;
}

double isi_energy(const EffectivePulse& g, double offset) {
    const int reach = static_cast<int>(std::ceil(g.half_support())) + 2;
    double total = 0.0;
    double peak = 0.0;
    for (int k = -reach; k <= reach; ++k) {
        const double v = g.at_symbols(k - offset);
        total += v * v;
        peak = std::max(peak, v * v);
    }
    return total - peak;
}

LocalizationMetrics localization_metrics(const EffectivePulse& g, std::span<const double> offsets) {
    LocalizationMetrics out;
    for (double d : offsets) out.isi.push_back(IsiPoint{d, isi_energy(g, d)});

    const auto& s = g.samples();
    const int half = static_cast<int>(s.size() / 2);
    const double q = g.oversampling();
    double e = 0.0, t2 = 0.0, d2 = 0.0;
    for (int i = 0; i < static_cast<int>(s.size()); ++i) {
        const double t = (i - half) / q;
        e += s[static_cast<std::size_t>(i)] * s[static_cast<std::size_t>(i)];
        t2 += t * t * s[static_cast<std::size_t>(i)] * s[static_cast<std::size_t>(i)];
        if (i > 0 && i + 1 < static_cast<int>(s.size())) {
            const double dv = (s[static_cast<std::size_t>(i + 1)] - s[static_cast<std::size_t>(i - 1)]) * q / 2.0;
            d2 += dv * dv;
        }
    }
    out.rms_time_width = std::sqrt(t2 / e);
    out.rms_bandwidth = std::sqrt(d2 / e) / (2.0 * kPi);
    return out;
}

}  // namespace ddsim
