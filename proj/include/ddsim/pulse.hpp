#pragma once

// Transmit pulse prototypes and their matched-filter effective pulses.
//
// All prototypes live on a fine grid of Q samples per symbol period T_s,
// covering [-span*T_s, +span*T_s] (2*span*Q + 1 samples), and are normalized
// to unit energy: sum(p^2) * T_s/Q = 1.

#include "ddsim/types.hpp"

#include <array>
#include <span>
#include <vector>

namespace ddsim {

enum class PulseKind { Srrc, TflHermite, Custom };

const char* to_string(PulseKind kind);

/// Number of Gaussian-Hermite coefficients D_0, D_4, ..., D_16.
inline constexpr int kTflTerms = 5;
using TflCoefficients = std::array<double, kTflTerms>;

/// Coefficients of the well-localized Hermite pulse expressed on unit-norm
/// Hermite functions psi_{4p}. Derived from the widely used polynomial form
/// a_0 = 1.412692577, a_4 = -3.0145e-3, a_8 = -8.8041e-6, a_12 = -2.2611e-9,
/// a_16 = -4.4570e-15 (physicists' H_k) via D_k = a_k sqrt(2^k k! sqrt(pi)).
TflCoefficients default_tfl_coefficients();

/// Dimensionless-to-physical time scale at which the default coefficients
/// give a near-Nyquist effective pulse: 1 / (2 sqrt(pi)).
double natural_tfl_scale();

struct PulsePrototype {
    PulseKind kind = PulseKind::Custom;
    double rolloff = 0.0;           // SRRC only
    TflCoefficients coeffs{};       // TFL only
    double scale = 0.0;             // TFL only: t_phys = scale * T_s * x
    int oversampling = 64;          // Q
    int span = 16;                  // support [-span, span] symbol periods
    double symbol_period = 1.0;     // T_s [s]
    std::vector<double> samples;    // length 2*span*Q + 1, centre at index span*Q

    double fine_step() const { return symbol_period / oversampling; }
    int centre_index() const { return span * oversampling; }
    double energy() const;
    std::string label() const;
};

/// Peak-normalized effective pulse g(t) sampled on the fine grid over
/// [-2*span*T_s, 2*span*T_s], evaluated between samples by 4-point cubic
/// (Lagrange) interpolation and exactly zero outside its support.
class EffectivePulse {
public:
    EffectivePulse(std::vector<double> samples, int oversampling, double symbol_period,
                   std::string label = "custom");

    /// g(t) for t in seconds.
    double operator()(double t) const { return at_symbols(t / symbol_period_); }
    /// g(x * T_s).
    double at_symbols(double x) const;

    const std::vector<double>& samples() const { return samples_; }
    int oversampling() const { return oversampling_; }
    double symbol_period() const { return symbol_period_; }
    /// Half-width of the support in symbol periods.
    double half_support() const { return static_cast<double>(half_len_) / oversampling_; }
    const std::string& label() const { return label_; }

private:
    std::vector<double> samples_;
    int oversampling_;
    int half_len_;
    double symbol_period_;
    std::string label_;
};

double srrc_value(double t, double rolloff, double symbol_period);
double rc_value(double t, double rolloff, double symbol_period);

/// Orthonormal Gaussian-Hermite function psi_p(x).
double hermite_function(int order, double x);

struct DiscreteHermiteBasis {
    int size = 0;              // number of sample points
    double sigma = 1.0;
    RMatrix vectors;           // size x count, column p ~ psi_p
    RVector eigenvalues;       // descending

    /// Spacing of the sample points in the dimensionless Hermite argument.
    double grid_step() const;
};

/// Eigenvectors of the symmetric tridiagonal matrix whose eigenvectors are
/// discrete Gaussian-Hermite functions. `count` < 0 returns the full basis;
/// otherwise only the first `count` columns (orders 0..count-1).
DiscreteHermiteBasis discrete_hermite(int size, double sigma, int count = -1);

PulsePrototype srrc_prototype(double rolloff, int oversampling, int span, double symbol_period);

enum class HermiteRoute { Continuous, Discrete };

struct TflOptions {
    HermiteRoute route = HermiteRoute::Continuous;
    int discrete_size = 0;     // 0 -> 2*span*Q + 1
    double discrete_sigma = 1.0;
};

PulsePrototype tfl_prototype(const TflCoefficients& coeffs, double scale, int oversampling,
                             int span, double symbol_period, const TflOptions& options = {});

struct ScaleCalibration {
    double scale = 0.0;
    double isi = 0.0;           // sum_{k != 0} g_H(k T_s)^2 at the optimum
};

/// One-dimensional bounded search for the time scale minimizing the integer
/// lag leakage of the effective pulse. The bracket defaults to +-15 % around
/// natural_tfl_scale(); the leakage tends to zero as the scale shrinks (the
/// pulse degenerates to an impulse), so the search must stay bracketed.
ScaleCalibration calibrate_tfl_scale(const TflCoefficients& coeffs, int oversampling, int span,
                                     double lo = 0.0, double hi = 0.0);

EffectivePulse effective_pulse(const PulsePrototype& prototype);

/// Raised-cosine effective pulse sampled from the closed form (allows rolloff 0).
EffectivePulse rc_effective_pulse(double rolloff, int oversampling, int span, double symbol_period);

/// g(k T_s - tau) for k = 0..len-1.
RVector sample_shifted(const EffectivePulse& g, double tau, int len);

struct IsiPoint {
    double offset = 0.0;       // in symbol periods
    double energy = 0.0;
};

struct LocalizationMetrics {
    std::vector<IsiPoint> isi;
    double rms_time_width = 0.0;   // in T_s
    double rms_bandwidth = 0.0;    // in 1/T_s
};

/// sum_{k != k*} g(k T_s - delta T_s)^2, k* the index of the largest sample.
double isi_energy(const EffectivePulse& g, double offset);
LocalizationMetrics localization_metrics(const EffectivePulse& g, std::span<const double> offsets);

}  // namespace ddsim
