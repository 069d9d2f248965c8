#pragma once

// DD-domain input-output operator H with z = H d.
//
// Each contributing component c has a gain a_c, a length-MN time-variation
// sequence u_c (applied at the transmit index) and a circular length-MN delay
// response g_c. With Uz = DZT(u_c), Gz = DZT(g_c):
//
//   H[nM+m, kM+l] = sum_c a_c Uz[l, (n-k)_N] Gz[(m-l)_M, n] e^{-j 2 pi n rho / N},
//   rho = 1 if m < l else 0,
//
// which equals DZT(sum_c a_c (s .* u_c) (*) g_c) for s = IDZT(d), (*) the
// circular convolution over MN samples. A physical path contributes
// a = h exp(j 2 pi nu tau), u[k] = exp(j 2 pi nu k T_s) and
// g[k] = sum_r g(((k + r MN) T_s - tau)).

#include "ddsim/channel.hpp"
#include "ddsim/grid_zak.hpp"
#include "ddsim/pulse.hpp"

#include <string>
#include <vector>

namespace ddsim {

struct ChannelComponent {
    cplx gain{1.0, 0.0};
    CVector u;   // time variation, length MN
    CVector g;   // circular delay response, length MN
};

struct EffectiveChannelMatrix {
    CMatrix H;
    int M = 0;
    int N = 0;
    std::string pulse_label;
    PathSet paths;
};

/// Circular periodization of g(k T_s - tau) over MN samples.
CVector periodized_response(const EffectivePulse& g, double tau, int MN);

std::vector<ChannelComponent> path_components(const PathSet& ps, const EffectivePulse& g, int M, int N);

/// Elementwise sum over all (n, m, k, l).
CMatrix assemble_elementwise(const std::vector<ChannelComponent>& comps, int M, int N);

/// Block construction: block (n, k) of each component is U^{(n-k)_N} .* G^n
/// where every row of U^p is column p of Uz and G^n is the circulant of
/// column n of Gz masked by the wrap-around phase on its strict upper triangle.
CMatrix assemble_block_form(const std::vector<ChannelComponent>& comps, int M, int N);

EffectiveChannelMatrix build_effective_channel(const PathSet& ps, const EffectivePulse& g, int M, int N);

CVector apply_dd(const EffectiveChannelMatrix& Hm, const CVector& d);

/// Response to a unit impulse at DD bin (l, k): column kM + l of H as a grid.
CMatrix impulse_response(const EffectiveChannelMatrix& Hm, int l, int k);

}  // namespace ddsim
