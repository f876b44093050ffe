#include "vortex/fourier.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <tuple>

namespace vortex {

namespace {

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

struct RealBuf {
  double* p;
  explicit RealBuf(std::size_t n) : p(fftw_alloc_real(n)) {}
  ~RealBuf() { fftw_free(p); }
};

struct ComplexBuf {
  fftw_complex* p;
  explicit ComplexBuf(std::size_t n) : p(fftw_alloc_complex(n)) {}
  ~ComplexBuf() { fftw_free(p); }
};

}  // namespace

PeriodicFourier::PeriodicFourier(const GridDomain& d)
    : n1_(d.nx()), n2_(d.ny()), nh_(d.ny() / 2 + 1), cell_area_(d.cell_area()) {
  if (!d.is_torus()) throw DomainError("PeriodicFourier needs a torus domain");
  symbol_.resize(static_cast<std::size_t>(n1_) * nh_);
  const double two_pi = 2.0 * std::numbers::pi;
  const double hx = d.hx(), hy = d.hy();
  for (int i = 0; i < n1_; ++i) {
    const double k1 = two_pi / d.ext1 * (i <= n1_ / 2 ? i : i - n1_);
    for (int j = 0; j < nh_; ++j) {
      const double k2 = two_pi / d.ext2 * j;
      double s;
      if (d.stencil == TorusStencil::spectral) {
        s = -(k1 * k1 + k2 * k2);
      } else {
        const double sx = std::sin(0.5 * k1 * hx), sy = std::sin(0.5 * k2 * hy);
        s = -4.0 * (sx * sx / (hx * hx) + sy * sy / (hy * hy));
      }
      symbol_[static_cast<std::size_t>(i) * nh_ + j] = s;
    }
  }
  std::lock_guard lock(planner_mutex());
  RealBuf r(static_cast<std::size_t>(n1_) * n2_);
  ComplexBuf c(symbol_.size());
  plan_fwd_ = fftw_plan_dft_r2c_2d(n1_, n2_, r.p, c.p, FFTW_ESTIMATE);
  plan_bwd_ = fftw_plan_dft_c2r_2d(n1_, n2_, c.p, r.p, FFTW_ESTIMATE);
}

PeriodicFourier::~PeriodicFourier() {
  std::lock_guard lock(planner_mutex());
  fftw_destroy_plan(static_cast<fftw_plan>(plan_fwd_));
  fftw_destroy_plan(static_cast<fftw_plan>(plan_bwd_));
}

void PeriodicFourier::forward(std::span<const double> in,
                              std::vector<std::complex<double>>& out) const {
  const std::size_t n = static_cast<std::size_t>(n1_) * n2_;
  RealBuf r(n);
  ComplexBuf c(symbol_.size());
  std::copy(in.begin(), in.begin() + n, r.p);
  fftw_execute_dft_r2c(static_cast<fftw_plan>(plan_fwd_), r.p, c.p);
  out.resize(symbol_.size());
  for (std::size_t k = 0; k < symbol_.size(); ++k) out[k] = {c.p[k][0], c.p[k][1]};
}

void PeriodicFourier::backward(std::vector<std::complex<double>>& in, std::span<double> out) const {
  const std::size_t n = static_cast<std::size_t>(n1_) * n2_;
  RealBuf r(n);
  ComplexBuf c(symbol_.size());
  for (std::size_t k = 0; k < symbol_.size(); ++k) {
    c.p[k][0] = in[k].real();
    c.p[k][1] = in[k].imag();
  }
  fftw_execute_dft_c2r(static_cast<fftw_plan>(plan_bwd_), c.p, r.p);
  const double s = 1.0 / static_cast<double>(n);
  for (std::size_t k = 0; k < n; ++k) out[k] = r.p[k] * s;
}

void PeriodicFourier::apply(std::span<const double> in, std::span<double> out,
                            const std::function<double(double)>& m) const {
  std::vector<std::complex<double>> c;
  forward(in, c);
  for (std::size_t k = 0; k < c.size(); ++k) c[k] *= m(symbol_[k]);
  backward(c, out);
}

void PeriodicFourier::apply_block(std::span<const double> iu, std::span<const double> iv,
                                  std::span<double> ou, std::span<double> ov,
                                  const std::function<std::array<double, 4>(double)>& b) const {
  std::vector<std::complex<double>> cu, cv;
  forward(iu, cu);
  forward(iv, cv);
  for (std::size_t k = 0; k < cu.size(); ++k) {
    const auto m = b(symbol_[k]);
    const std::complex<double> x = cu[k], y = cv[k];
    cu[k] = m[0] * x + m[1] * y;
    cv[k] = m[2] * x + m[3] * y;
  }
  backward(cu, ou);
  backward(cv, ov);
}

void PeriodicFourier::laplacian(std::span<const double> in, std::span<double> out) const {
  apply(in, out, [](double s) { return s; });
}

void PeriodicFourier::solve_poisson(std::span<const double> rhs, std::span<double> out) const {
  apply(rhs, out, [](double s) { return s == 0.0 ? 0.0 : 1.0 / s; });
}

double PeriodicFourier::dirichlet(std::span<const double> f, std::span<const double> g) const {
  std::vector<std::complex<double>> cf, cg;
  forward(f, cf);
  forward(g, cg);
  double acc = 0.0;
  for (int i = 0; i < n1_; ++i) {
    for (int j = 0; j < nh_; ++j) {
      const std::size_t k = static_cast<std::size_t>(i) * nh_ + j;
      const double w = (j == 0 || (n2_ % 2 == 0 && j == n2_ / 2)) ? 1.0 : 2.0;
      acc += w * -symbol_[k] * (cf[k] * std::conj(cg[k])).real();
    }
  }
  return acc * cell_area_ / (static_cast<double>(n1_) * n2_);
}

BoxSine::BoxSine(int interior_x, int interior_y, double hx, double hy)
    : mx_(interior_x), my_(interior_y) {
  neg_lap_.resize(static_cast<std::size_t>(mx_) * my_);
  const double pi = std::numbers::pi;
  for (int i = 0; i < mx_; ++i) {
    const double sx = std::sin(0.5 * pi * (i + 1) / (mx_ + 1));
    for (int j = 0; j < my_; ++j) {
      const double sy = std::sin(0.5 * pi * (j + 1) / (my_ + 1));
      neg_lap_[static_cast<std::size_t>(i) * my_ + j] =
          4.0 * (sx * sx / (hx * hx) + sy * sy / (hy * hy));
    }
  }
  std::lock_guard lock(planner_mutex());
  RealBuf a(neg_lap_.size()), b(neg_lap_.size());
  plan_ = fftw_plan_r2r_2d(mx_, my_, a.p, b.p, FFTW_RODFT00, FFTW_RODFT00, FFTW_ESTIMATE);
}

BoxSine::~BoxSine() {
  std::lock_guard lock(planner_mutex());
  fftw_destroy_plan(static_cast<fftw_plan>(plan_));
}

void BoxSine::apply(std::span<const double> in, std::span<double> out,
                    const std::function<double(double)>& m) const {
  const std::size_t n = neg_lap_.size();
  RealBuf a(n), b(n);
  std::copy(in.begin(), in.begin() + n, a.p);
  fftw_execute_r2r(static_cast<fftw_plan>(plan_), a.p, b.p);
  const double norm = 1.0 / (4.0 * (mx_ + 1.0) * (my_ + 1.0));
  for (std::size_t k = 0; k < n; ++k) b.p[k] *= m(neg_lap_[k]) * norm;
  fftw_execute_r2r(static_cast<fftw_plan>(plan_), b.p, a.p);
  std::copy(a.p, a.p + n, out.begin());
}

const PeriodicFourier& periodic_fourier(const GridDomain& d) {
  using Key = std::tuple<int, int, double, double, int>;
  static std::mutex m;
  static std::map<Key, std::unique_ptr<PeriodicFourier>> cache;
  const Key key{d.n1, d.n2, d.ext1, d.ext2, static_cast<int>(d.stencil)};
  std::lock_guard lock(m);
  auto& slot = cache[key];
  if (!slot) slot = std::make_unique<PeriodicFourier>(d);
  return *slot;
}

const BoxSine& box_sine(const GridDomain& d) {
  if (!d.is_box()) throw DomainError("box_sine needs a box domain");
  using Key = std::tuple<int, int, double, double>;
  static std::mutex m;
  static std::map<Key, std::unique_ptr<BoxSine>> cache;
  const Key key{d.n1, d.n2, d.ext1, d.ext2};
  std::lock_guard lock(m);
  auto& slot = cache[key];
  if (!slot) slot = std::make_unique<BoxSine>(d.nx() - 2, d.ny() - 2, d.hx(), d.hy());
  return *slot;
}

}  // namespace vortex
