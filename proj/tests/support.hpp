#pragma once

#include <cmath>

#include "threewave/soliton.hpp"

namespace threewave::testing {

inline Mat3 soliton_matrix(const SolitonEnsemble& ens, double x, double t) {
  return reconstruct(solve_reflectionless(ens, x, t), ens.sys);
}

// Centred-difference residual of p_ij,t - n_ij p_ij,x + sum_k (n_kj - n_ik) p_ik p_kj
// for the upper-triangle channels, maximised over the sample points.
inline double pde_residual(const SolitonEnsemble& ens, double t, double h, double x_lo, double x_hi, int samples) {
  const WaveSystem& s = ens.sys;
  double worst = 0.0;
  for (int m = 0; m < samples; ++m) {
    double x = x_lo + (x_hi - x_lo) * m / (samples - 1);
    Mat3 P = soliton_matrix(ens, x, t);
    Mat3 Pt = (soliton_matrix(ens, x, t + h) - soliton_matrix(ens, x, t - h)) / (2.0 * h);
    Mat3 Px = (soliton_matrix(ens, x + h, t) - soliton_matrix(ens, x - h, t)) / (2.0 * h);
    for (auto [i, j] : kChannelIndex) {
      cplx r = Pt(i, j) - s.n(i, j) * Px(i, j);
      for (int k = 0; k < 3; ++k) {
        if (k == i || k == j) continue;
        r += (s.n(k, j) - s.n(i, k)) * P(i, k) * P(k, j);
      }
      worst = std::max(worst, std::abs(r));
    }
  }
  return worst;
}

}  // namespace threewave::testing
