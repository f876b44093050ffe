#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "vortex/grid.hpp"

namespace testing {

// smooth random field: a few low Fourier modes with random amplitudes
inline vortex::ScalarField smooth_random(const vortex::GridDomain& d, std::mt19937_64& rng,
                                         double amp = 1.0, int modes = 3) {
  std::normal_distribution<double> nd(0.0, amp);
  vortex::ScalarField f(d);
  const double lx = d.is_box() ? 2.0 * d.ext1 : d.ext1;
  const double ly = d.is_box() ? 2.0 * d.ext2 : d.ext2;
  const double two_pi = 2.0 * std::acos(-1.0);
  for (int a = 0; a <= modes; ++a)
    for (int b = 0; b <= modes; ++b) {
      const double c1 = nd(rng) / (1 + a + b), c2 = nd(rng) / (1 + a + b);
      for (int i = 0; i < d.nx(); ++i)
        for (int j = 0; j < d.ny(); ++j) {
          const double ph = two_pi * (a * d.x(i) / lx + b * d.y(j) / ly);
          f(i, j) += c1 * std::cos(ph) + c2 * std::sin(ph);
        }
    }
  return f;
}

inline vortex::ScalarField white_noise(const vortex::GridDomain& d, std::mt19937_64& rng,
                                       double amp = 1.0) {
  std::normal_distribution<double> nd(0.0, amp);
  vortex::ScalarField f(d);
  for (std::size_t k = 0; k < f.size(); ++k) f[k] = nd(rng);
  return f;
}

// zero on the box edge, smooth inside
inline vortex::ScalarField box_bump(const vortex::GridDomain& d, std::mt19937_64& rng,
                                    double amp = 1.0) {
  vortex::ScalarField f = smooth_random(d, rng, amp);
  const double l = d.ext1;
  for (int i = 0; i < d.nx(); ++i)
    for (int j = 0; j < d.ny(); ++j) {
      const double x = d.x(i) / l, y = d.y(j) / l;
      f(i, j) *= (1 - x * x) * (1 - y * y);
    }
  for (int i = 0; i < d.nx(); ++i)
    for (int j = 0; j < d.ny(); ++j)
      if (d.on_boundary(i, j)) f(i, j) = 0.0;
  return f;
}

inline double rel_diff(double a, double b) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300});
}

}  // namespace testing
