#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "vortex/grid.hpp"

namespace vortex {

// Real-to-complex 2-D FFT on a torus grid plus the Laplacian symbol of the
// domain's stencil on the half spectrum.
class PeriodicFourier {
 public:
  explicit PeriodicFourier(const GridDomain& d);
  ~PeriodicFourier();
  PeriodicFourier(const PeriodicFourier&) = delete;
  PeriodicFourier& operator=(const PeriodicFourier&) = delete;

  std::size_t spectrum_size() const { return symbol_.size(); }
  // nonpositive Laplacian eigenvalue per half-spectrum entry
  const std::vector<double>& symbol() const { return symbol_; }

  void forward(std::span<const double> in, std::vector<std::complex<double>>& out) const;
  // normalized inverse
  void backward(std::vector<std::complex<double>>& in, std::span<double> out) const;

  void laplacian(std::span<const double> in, std::span<double> out) const;
  // out = Delta^{-1} rhs on the mean-zero subspace (rhs mean is discarded)
  void solve_poisson(std::span<const double> rhs, std::span<double> out) const;
  double dirichlet(std::span<const double> f, std::span<const double> g) const;

  // out = m(symbol) * in; m(0) applies to the constant mode
  void apply(std::span<const double> in, std::span<double> out,
             const std::function<double(double)>& m) const;
  // 2x2 block multiplier: (ou, ov) = B(symbol) (iu, iv), B = {b11, b12, b21, b22}
  void apply_block(std::span<const double> iu, std::span<const double> iv, std::span<double> ou,
                   std::span<double> ov,
                   const std::function<std::array<double, 4>(double)>& b) const;

 private:
  int n1_, n2_, nh_;
  double cell_area_;
  std::vector<double> symbol_;
  void* plan_fwd_ = nullptr;
  void* plan_bwd_ = nullptr;
};

// DST-I on the interior nodes of a box grid; diagonalizes the 5-point
// Laplacian with zero values on the box edge.
class BoxSine {
 public:
  BoxSine(int interior_x, int interior_y, double hx, double hy);
  ~BoxSine();
  BoxSine(const BoxSine&) = delete;
  BoxSine& operator=(const BoxSine&) = delete;

  // out = m(-lambda) * in on the interior, lambda the Laplacian eigenvalue
  void apply(std::span<const double> in, std::span<double> out,
             const std::function<double(double)>& m) const;

 private:
  int mx_, my_;
  std::vector<double> neg_lap_;
  void* plan_ = nullptr;
};

// cached per distinct domain; creation is serialized
const PeriodicFourier& periodic_fourier(const GridDomain& d);
const BoxSine& box_sine(const GridDomain& d);

}  // namespace vortex
