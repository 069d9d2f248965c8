#pragma once

// Embedded pilot-with-cyclic-prefix channel estimation, effective-channel
// reconstruction, MMSE detection and NMSE.

#include "ddsim/effective_channel.hpp"
#include "ddsim/grid_zak.hpp"

#include <optional>
#include <vector>

namespace ddsim {

/// The pilot is a length-`seq_len` unit-modulus sequence placed along the
/// delay axis in Doppler column `pilot_column`, extended cyclically by
/// `taps_after` samples in front and `taps_before` behind. The pilot rows plus
/// `guard` rows on each side are kept free of data in every Doppler column.
struct PilotLayout {
    int seq_len = 9;
    int taps_before = 1;        // anticausal taps estimated
    int taps_after = 7;         // causal taps estimated
    int guard = 2;
    double pilot_power_db = 30.0;
    int pilot_column = -1;      // -1: N / 2
    int first_row = -1;         // first pilot row; -1: centre the reserved band
    int zc_root = 1;
    int bem_oversampling = 2;   // basis frequency spacing 1/R Doppler bins
    double max_doppler_bins = 0.0;
    int bem_order = 0;          // 0: 2 R ceil(max_doppler_bins) + 1

    int pilot_rows() const { return seq_len + taps_before + taps_after; }
    int reserved_rows() const { return pilot_rows() + 2 * guard; }
    int resolved_column(int N) const { return pilot_column < 0 ? N / 2 : pilot_column; }
    int resolved_first_row(int M) const;
    int resolved_bem_order() const;
    void validate(int M, int N) const;
};

/// Zadoff-Chu sequence exp(-j pi r k (k + 1) / L) (odd L).
CVector zadoff_chu(int length, int root);

/// Data cells (true) of the layout.
FrameMask data_mask(const PilotLayout& layout, int M, int N);

/// Frame containing only the scaled pilot and its cyclic extension.
DDFrame pilot_frame(const PilotLayout& layout, int M, int N);

struct PilotedFrame {
    DDFrame frame;
    FrameMask mask;
};

/// Writes the pilot into `data` and clears guard cells. Data cells outside
/// the mask are overwritten.
PilotedFrame embed_pilot(const DDFrame& data, const PilotLayout& layout);

struct ChannelEstimate {
    std::vector<double> frequencies;   // basis frequencies in Doppler bins
    CMatrix taps;                      // (taps_before + taps_after + 1) x basis
    CMatrix H;                         // reconstructed effective channel
    double noise_variance = 0.0;
};

/// Least-squares fit, in the delay-time domain, of
///   y[l] = sum_b sum_p a_b[p] phi_b(l - p) s[(l - p) mod MN],
///   phi_b(k) = exp(j 2 pi f_b k / MN),
/// to the data-free rows around the pilot (all Doppler columns). The fitted
/// responses are fed through the effective-channel assembly to form H-hat.
/// Throws NumericalError when the system is rank deficient (e.g. no pilot).
ChannelEstimate estimate_channel(const DDFrame& Z, const PilotLayout& layout, double noise_variance = 0.0);

/// MMSE detector for a fixed channel and data mask. The Gram matrix is
/// formed once; each noise level gets its own factorization.
class MmseDetector {
public:
    class Solver {
    public:
        double noise_variance() const { return noise_variance_; }

    private:
        friend class MmseDetector;
        Eigen::LLT<CMatrix> llt_;
        double noise_variance_ = 0.0;
    };

    MmseDetector(const CMatrix& H, const FrameMask& mask);

    /// Throws NumericalError if H_d^H H_d + s2 I is numerically singular.
    Solver prepare(double noise_variance) const;
    /// Equalized data symbols in mask order; `known` (full-frame, zero on data
    /// cells) is subtracted through H first.
    CVector detect(const Solver& solver, const CVector& z, const std::optional<CVector>& known = std::nullopt) const;

private:
    CMatrix H_;
    CMatrix Hd_;
    CMatrix gram_;
};

/// Full-frame MMSE: (H^H H + s2 I)^{-1} H^H z.
CVector mmse_equalize(const CMatrix& H, const CVector& z, double noise_variance);

/// MMSE restricted to the data cells after subtracting the known pilot
/// contribution. Returns the equalized data symbols in mask order.
CVector mmse_detect(const CMatrix& H, const CVector& z, double noise_variance, const FrameMask& mask,
                    const std::optional<CVector>& known = std::nullopt);

/// ||Hhat - H||_F^2 / ||H||_F^2.
double nmse(const CMatrix& Hhat, const CMatrix& H);

}  // namespace ddsim
