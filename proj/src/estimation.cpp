#include "ddsim/estimation.hpp"

#include <cmath>
#include <string>

namespace ddsim {

namespace {

constexpr double kRcondFloor = 1e-13;

CMatrix factor_and_solve(const CMatrix& A, const CMatrix& B, const char* what) {
    Eigen::LLT<CMatrix> llt(A);
    if (llt.info() != Eigen::Success || !(llt.rcond() > kRcondFloor)) {
        throw NumericalError(std::string(what) + ": normal matrix is numerically singular");
    }
    return llt.solve(B);
}

}  // namespace

int PilotLayout::resolved_first_row(int M) const {
    return first_row < 0 ? (M - reserved_rows()) / 2 + guard : first_row;
}

int PilotLayout::resolved_bem_order() const {
    if (bem_order > 0) return bem_order;
    return 2 * bem_oversampling * static_cast<int>(std::ceil(max_doppler_bins - 1e-12)) + 1;
}

void PilotLayout::validate(int M, int N) const {
    if (seq_len < 1 || taps_before < 0 || taps_after < 0 || guard < 0) {
        throw InvalidArgument("pilot layout sizes must be nonnegative");
    }
    if (bem_oversampling < 1) throw InvalidArgument("basis oversampling must be >= 1");
    if (bem_order < 0 || max_doppler_bins < 0.0) throw InvalidArgument("basis order must be nonnegative");
    const int col = resolved_column(N);
    if (col < 0 || col >= N) throw InvalidArgument("pilot column outside the grid");
    const int r0 = resolved_first_row(M);
    if (r0 - guard < 0 || r0 + pilot_rows() + guard > M) {
        throw InvalidArgument("pilot region does not fit the delay axis (M=" + std::to_string(M) + ")");
    }
}

CVector zadoff_chu(int length, int root) {
    if (length < 1) throw InvalidArgument("sequence length must be positive");
    CVector x(length);
    for (int k = 0; k < length; ++k) {
        const double e = static_cast<double>(root) * k * (k + (length % 2)) / length;
        x[k] = std::polar(1.0, -kPi * std::fmod(e, 2.0));
    }
    return x;
}

FrameMask data_mask(const PilotLayout& layout, int M, int N) {
    layout.validate(M, N);
    FrameMask mask(M, N, true);
    const int lo = layout.resolved_first_row(M) - layout.guard;
    for (int n = 0; n < N; ++n) {
        for (int m = lo; m < lo + layout.reserved_rows(); ++m) mask.set(m, n, false);
    }
    return mask;
}

DDFrame pilot_frame(const PilotLayout& layout, int M, int N) {
    layout.validate(M, N);
    DDFrame f(M, N);
    const CVector seq = zadoff_chu(layout.seq_len, layout.zc_root);
    const double amp = std::sqrt(std::pow(10.0, layout.pilot_power_db / 10.0));
    const int r0 = layout.resolved_first_row(M);
    const int col = layout.resolved_column(N);
    const int L = layout.seq_len;
    for (int j = 0; j < layout.pilot_rows(); ++j) {
        const int idx = ((j - layout.taps_after) % L + L) % L;
        f(r0 + j, col) = amp * seq[idx];
    }
    return f;
}

PilotedFrame embed_pilot(const DDFrame& data, const PilotLayout& layout) {
    const int M = data.M();
    const int N = data.N();
    PilotedFrame out{pilot_frame(layout, M, N), data_mask(layout, M, N)};
    for (int n = 0; n < N; ++n) {
        for (int m = 0; m < M; ++m) {
            if (out.mask(m, n)) out.frame(m, n) = data(m, n);
        }
    }
    return out;
}

ChannelEstimate estimate_channel(const DDFrame& Z, const PilotLayout& layout, double noise_variance) {
    const int M = Z.M();
    const int N = Z.N();
    const int MN = M * N;
    layout.validate(M, N);

    const CVector s = idzt(pilot_frame(layout, M, N)).samples;
    const CVector y_all = idzt(Z).samples;

    // Rows whose received value depends on pilot and guard cells only.
    const int r0 = layout.resolved_first_row(M);
    const int row_lo = r0 - layout.guard + layout.taps_after;
    const int row_hi = r0 + layout.pilot_rows() - 1 + layout.guard - layout.taps_before;
    if (row_hi < row_lo) throw InvalidArgument("pilot layout leaves no observation rows");

    const int P = layout.taps_before + layout.taps_after + 1;
    const int B = layout.resolved_bem_order();
    std::vector<double> freqs(static_cast<std::size_t>(B));
    for (int b = 0; b < B; ++b) {
        freqs[static_cast<std::size_t>(b)] = static_cast<double>(b - (B - 1) / 2) / layout.bem_oversampling;
    }

    const int rows = row_hi - row_lo + 1;
    const int n_obs = rows * N;
    CMatrix A(n_obs, P * B);
    CVector y(n_obs);
    int r = 0;
    for (int q = 0; q < N; ++q) {
        for (int m = row_lo; m <= row_hi; ++m, ++r) {
            const int l = q * M + m;
            y[r] = y_all[l];
            for (int pi = 0; pi < P; ++pi) {
                const int k = ((l - (pi - layout.taps_before)) % MN + MN) % MN;
                for (int b = 0; b < B; ++b) {
                    const double ph = 2.0 * kPi * freqs[static_cast<std::size_t>(b)] * k / MN;
                    A(r, b * P + pi) = std::polar(1.0, ph) * s[k];
                }
            }
        }
    }

    Eigen::ColPivHouseholderQR<CMatrix> qr(A);
    qr.setThreshold(1e-10);
    if (qr.rank() < A.cols()) {
        throw NumericalError("pilot least-squares system is rank deficient (rank " + std::to_string(qr.rank()) +
                             " of " + std::to_string(A.cols()) + ")");
    }
    const CVector coef = qr.solve(y);

    ChannelEstimate est;
    est.frequencies = freqs;
    est.noise_variance = noise_variance;
    est.taps = Eigen::Map<const CMatrix>(coef.data(), P, B);

    std::vector<ChannelComponent> comps(static_cast<std::size_t>(B));
    for (int b = 0; b < B; ++b) {
        auto& c = comps[static_cast<std::size_t>(b)];
        c.u.resize(MN);
        for (int k = 0; k < MN; ++k) {
            c.u[k] = std::polar(1.0, 2.0 * kPi * freqs[static_cast<std::size_t>(b)] * k / MN);
        }
        c.g = CVector::Zero(MN);
        for (int pi = 0; pi < P; ++pi) {
            const int lag = pi - layout.taps_before;
            c.g[((lag % MN) + MN) % MN] += est.taps(pi, b);
        }
    }
    est.H = assemble_elementwise(comps, M, N);
    return est;
}

CVector mmse_equalize(const CMatrix& H, const CVector& z, double noise_variance) {
    if (H.rows() != z.size()) throw InvalidArgument("observation length does not match the channel");
    if (noise_variance < 0.0) throw InvalidArgument("noise variance must be nonnegative");
    CMatrix G = H.adjoint() * H;
    G.diagonal().array() += noise_variance;
    return factor_and_solve(G, H.adjoint() * z, "MMSE");
}

MmseDetector::MmseDetector(const CMatrix& H, const FrameMask& mask) : H_(H) {
    if (H.cols() != static_cast<Eigen::Index>(mask.M()) * mask.N()) {
        throw InvalidArgument("channel and mask dimensions disagree");
    }
    const auto idx = mask.indices();
    Hd_.resize(H.rows(), static_cast<Eigen::Index>(idx.size()));
    for (std::size_t k = 0; k < idx.size(); ++k) Hd_.col(static_cast<Eigen::Index>(k)) = H.col(idx[k]);
    gram_ = Hd_.adjoint() * Hd_;
}

MmseDetector::Solver MmseDetector::prepare(double noise_variance) const {
    if (noise_variance < 0.0) throw InvalidArgument("noise variance must be nonnegative");
    CMatrix G = gram_;
    G.diagonal().array() += noise_variance;
    Solver s;
    s.noise_variance_ = noise_variance;
    s.llt_.compute(G);
    if (s.llt_.info() != Eigen::Success || !(s.llt_.rcond() > kRcondFloor)) {
        throw NumericalError("MMSE: normal matrix is numerically singular");
    }
    return s;
}

CVector MmseDetector::detect(const Solver& solver, const CVector& z, const std::optional<CVector>& known) const {
    if (z.size() != H_.rows()) throw InvalidArgument("observation length does not match the channel");
    if (known) {
        if (known->size() != H_.cols()) throw InvalidArgument("known-symbol vector has wrong length");
        return solver.llt_.solve(Hd_.adjoint() * (z - H_ * *known));
    }
    return solver.llt_.solve(Hd_.adjoint() * z);
}

CVector mmse_detect(const CMatrix& H, const CVector& z, double noise_variance, const FrameMask& mask,
                    const std::optional<CVector>& known) {
    if (H.rows() != z.size()) throw InvalidArgument("observation length does not match the channel");
    const MmseDetector det(H, mask);
    return det.detect(det.prepare(noise_variance), z, known);
}

double nmse(const CMatrix& Hhat, const CMatrix& H) {
    if (Hhat.rows() != H.rows() || Hhat.cols() != H.cols()) throw InvalidArgument("matrix dimensions differ");
    const double den = H.squaredNorm();
    if (den == 0.0) throw InvalidArgument("reference channel is zero");
    return (Hhat - H).squaredNorm() / den;
}

}  // namespace ddsim
