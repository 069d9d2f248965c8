#include "ddsim/grid_zak.hpp"

#include <cmath>
#include <string>

namespace ddsim {

namespace {

// Unitary N-point DFT matrix with exponent sign `sign` (-1 forward, +1 inverse).
CMatrix dft_matrix(int N, int sign) {
    CMatrix F(N, N);
    const double scale = 1.0 / std::sqrt(static_cast<double>(N));
    for (int a = 0; a < N; ++a) {
        for (int b = 0; b < N; ++b) {
            // Reduce the exponent before scaling to keep the twiddles exact for large a*b.
            const long long r = (static_cast<long long>(a) * b) % N;
            const double phase = sign * 2.0 * kPi * static_cast<double>(r) / N;
            F(a, b) = std::polar(scale, phase);
        }
    }
    return F;
}

void check_dims(int M, int N) {
    if (M < 1 || N < 1) {
        throw InvalidArgument("grid dimensions must be positive, got M=" + std::to_string(M) +
                              " N=" + std::to_string(N));
    }
}

}  // namespace

DDFrame::DDFrame(int M, int N) {
    check_dims(M, N);
    values_ = CMatrix::Zero(M, N);
}

DDFrame::DDFrame(CMatrix values) : values_(std::move(values)) {
    check_dims(static_cast<int>(values_.rows()), static_cast<int>(values_.cols()));
}

CVector DDFrame::vec() const {
    return Eigen::Map<const CVector>(values_.data(), values_.size());
}

DDFrame DDFrame::from_vec(const CVector& d, int M, int N) {
    check_dims(M, N);
    if (d.size() != static_cast<Eigen::Index>(M) * N) {
        throw InvalidArgument("vector length " + std::to_string(d.size()) +
                              " does not match M*N=" + std::to_string(M * N));
    }
    return DDFrame(CMatrix(Eigen::Map<const CMatrix>(d.data(), M, N)));
}

FrameMask::FrameMask(int M, int N, bool value)
    : M_(M), N_(N), bits_(static_cast<std::size_t>(M) * N, value ? 1 : 0) {
    check_dims(M, N);
}

std::vector<int> FrameMask::indices() const {
    std::vector<int> out;
    out.reserve(bits_.size());
    for (std::size_t i = 0; i < bits_.size(); ++i) {
        if (bits_[i]) out.push_back(static_cast<int>(i));
    }
    return out;
}

int FrameMask::count() const {
    int c = 0;
    for (auto b : bits_) c += b;
    return c;
}

CMatrix dzt_sequence(const CVector& x, int M, int N) {
    check_dims(M, N);
    if (x.size() != static_cast<Eigen::Index>(M) * N) {
        throw InvalidArgument("DZT input length " + std::to_string(x.size()) +
                              " does not match M*N=" + std::to_string(M * N));
    }
    const Eigen::Map<const CMatrix> S(x.data(), M, N);
    return S * dft_matrix(N, -1);
}

CVector idzt_sequence(const CMatrix& grid) {
    const int M = static_cast<int>(grid.rows());
    const int N = static_cast<int>(grid.cols());
    check_dims(M, N);
    CMatrix S = grid * dft_matrix(N, +1);
    return Eigen::Map<const CVector>(S.data(), S.size());
}

TimeSignal idzt(const DDFrame& frame) {
    return TimeSignal{idzt_sequence(frame.values()), 0};
}

DDFrame dzt(const TimeSignal& signal, int M, int N) {
    if (signal.cp_len != 0) {
        throw InvalidArgument("dzt expects a signal without cyclic prefix");
    }
    return DDFrame(dzt_sequence(signal.samples, M, N));
}

TimeSignal add_cp(const TimeSignal& signal, int cp_len) {
    if (signal.cp_len != 0) {
        throw InvalidArgument("signal already carries a cyclic prefix");
    }
    const auto L = static_cast<int>(signal.samples.size());
    if (cp_len < 0 || cp_len > L) {
        throw InvalidArgument("cyclic prefix length " + std::to_string(cp_len) +
                              " outside [0, " + std::to_string(L) + "]");
    }
    TimeSignal out;
    out.cp_len = cp_len;
    out.samples.resize(L + cp_len);
    out.samples.head(cp_len) = signal.samples.tail(cp_len);
    out.samples.tail(L) = signal.samples;
    return out;
}

TimeSignal remove_cp(const TimeSignal& signal) {
    if (signal.cp_len < 0 || signal.cp_len > signal.samples.size()) {
        throw InvalidArgument("recorded cyclic prefix length is inconsistent with the signal");
    }
    TimeSignal out;
    out.samples = signal.samples.tail(signal.samples.size() - signal.cp_len);
    return out;
}

}  // namespace ddsim
