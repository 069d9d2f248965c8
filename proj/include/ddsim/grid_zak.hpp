#pragma once

// Delay-Doppler grid types and the discrete Zak transform pair.
//
// Conventions:
//   F_N[m,n] = exp(-j 2 pi m n / N) / sqrt(N)           (unitary DFT)
//   IDZT:  s = vec(D F_N^H),   s[m + qM] = sum_k D[m,k] e^{+j2pi kq/N} / sqrt(N)
//   DZT:   D = unvec(s) F_N
// vec() stacks columns, which is also Eigen's default storage order, so the
// sample index of grid cell (m, n) is n*M + m.

#include "ddsim/types.hpp"

#include <cstdint>
#include <vector>

namespace ddsim {

/// M x N complex symbol grid. Row index = delay bin, column index = Doppler bin.
class DDFrame {
public:
    DDFrame(int M, int N);
    explicit DDFrame(CMatrix values);

    int M() const { return static_cast<int>(values_.rows()); }
    int N() const { return static_cast<int>(values_.cols()); }
    int size() const { return M() * N(); }

    const CMatrix& values() const { return values_; }
    CMatrix& values() { return values_; }

    cplx& operator()(int m, int n) { return values_(m, n); }
    cplx operator()(int m, int n) const { return values_(m, n); }

    /// Column-major vectorization d = vec(D).
    CVector vec() const;
    static DDFrame from_vec(const CVector& d, int M, int N);

    double energy() const { return values_.squaredNorm(); }

private:
    CMatrix values_;
};

/// Delay-time sequence, optionally carrying a cyclic prefix of cp_len samples.
struct TimeSignal {
    CVector samples;
    int cp_len = 0;

    int payload_length() const { return static_cast<int>(samples.size()) - cp_len; }
};

/// Boolean occupancy over an M x N grid, column-major like DDFrame::vec().
class FrameMask {
public:
    FrameMask(int M, int N, bool value = false);

    int M() const { return M_; }
    int N() const { return N_; }

    bool operator()(int m, int n) const { return bits_[static_cast<std::size_t>(n * M_ + m)] != 0; }
    void set(int m, int n, bool v) { bits_[static_cast<std::size_t>(n * M_ + m)] = v ? 1 : 0; }

    /// Flat (vec-order) indices of the set cells, ascending.
    std::vector<int> indices() const;
    int count() const;

private:
    int M_;
    int N_;
    std::vector<std::uint8_t> bits_;
};

TimeSignal idzt(const DDFrame& frame);
DDFrame dzt(const TimeSignal& signal, int M, int N);

/// DZT of a bare length-MN sequence; identical to dzt() without the
/// TimeSignal wrapper.
CMatrix dzt_sequence(const CVector& x, int M, int N);
/// Inverse of dzt_sequence, returning the vectorized delay-time sequence.
CVector idzt_sequence(const CMatrix& grid);

TimeSignal add_cp(const TimeSignal& signal, int cp_len);
TimeSignal remove_cp(const TimeSignal& signal);

}  // namespace ddsim
