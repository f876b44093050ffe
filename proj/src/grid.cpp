#include "vortex/grid.hpp"

#include <algorithm>
#include <cmath>

#include "vortex/fourier.hpp"
#include "vortex/kernels.hpp"

namespace vortex {

GridDomain GridDomain::torus(double l1, double l2, int n1, int n2, TorusStencil s) {
  GridDomain d{DomainKind::torus, n1, n2, l1, l2, s};
  d.validate();
  return d;
}

GridDomain GridDomain::box(double half_width, int n) {
  GridDomain d{DomainKind::box, n, n, half_width, half_width, TorusStencil::five_point};
  d.validate();
  return d;
}

void GridDomain::validate() const {
  if (n1 < 16 || n2 < 16 || n1 % 2 || n2 % 2)
    throw DomainError("grid sizes must be even and at least 16");
  if (!(ext1 > 0.0) || !(ext2 > 0.0) || !std::isfinite(ext1) || !std::isfinite(ext2))
    throw DomainError("domain extents must be positive");
  if (is_box() && (n1 != n2 || ext1 != ext2)) throw DomainError("box domains are square");
}

ScalarField::ScalarField(const GridDomain& d, std::vector<double> values)
    : dom_(d), v_(std::move(values)) {
  if (v_.size() != d.size()) throw DomainError("value count does not match the domain");
}

ScalarField& ScalarField::operator+=(const ScalarField& o) {
  require_same_domain(*this, o, "operator+=");
  for (std::size_t k = 0; k < v_.size(); ++k) v_[k] += o.v_[k];
  return *this;
}

ScalarField& ScalarField::operator-=(const ScalarField& o) {
  require_same_domain(*this, o, "operator-=");
  for (std::size_t k = 0; k < v_.size(); ++k) v_[k] -= o.v_[k];
  return *this;
}

ScalarField& ScalarField::operator*=(double s) {
  for (double& x : v_) x *= s;
  return *this;
}

ScalarField& ScalarField::operator+=(double c) {
  for (double& x : v_) x += c;
  return *this;
}

ScalarField& ScalarField::axpy(double s, const ScalarField& o) {
  require_same_domain(*this, o, "axpy");
  for (std::size_t k = 0; k < v_.size(); ++k) v_[k] += s * o.v_[k];
  return *this;
}

double ScalarField::max_abs() const {
  double m = 0.0;
  for (double x : v_) m = std::max(m, std::abs(x));
  return m;
}

bool ScalarField::all_finite() const {
  return std::all_of(v_.begin(), v_.end(), [](double x) { return std::isfinite(x); });
}

ScalarField operator+(ScalarField a, const ScalarField& b) { return a += b; }
ScalarField operator-(ScalarField a, const ScalarField& b) { return a -= b; }
ScalarField operator*(double s, ScalarField a) { return a *= s; }

void require_same_domain(const ScalarField& a, const ScalarField& b, const char* where) {
  if (!(a.domain() == b.domain()) || a.size() != b.size())
    throw DomainError(std::string(where) + ": fields live on different domains");
}

void require_finite(const ScalarField& f, const char* what) {
  for (std::size_t k = 0; k < f.size(); ++k)
    if (!std::isfinite(f[k]))
      throw std::runtime_error(std::string(what) + ": non-finite value at node " + std::to_string(k));
}

ScalarField laplacian(const ScalarField& f) {
  const GridDomain& d = f.domain();
  ScalarField out(d);
  if (d.is_box())
    kernels::box_laplacian(f.span(), out.span(), d.nx(), d.ny(), d.hx(), d.hy());
  else if (d.stencil == TorusStencil::five_point)
    kernels::periodic_laplacian(f.span(), out.span(), d.nx(), d.ny(), d.hx(), d.hy());
  else
    periodic_fourier(d).laplacian(f.span(), out.span());
  return out;
}

std::vector<double> quadrature_weights(const GridDomain& d) {
  std::vector<double> w(d.size(), d.cell_area());
  if (d.is_box()) {
    for (int i = 0; i < d.nx(); ++i)
      for (int j = 0; j < d.ny(); ++j) {
        double s = 1.0;
        if (i == 0 || i == d.nx() - 1) s *= 0.5;
        if (j == 0 || j == d.ny() - 1) s *= 0.5;
        w[d.index(i, j)] *= s;
      }
  }
  return w;
}

double integrate(const ScalarField& f) {
  const GridDomain& d = f.domain();
  if (d.is_torus()) return d.cell_area() * kernels::sum(f.span());
  const std::vector<double> w = quadrature_weights(d);
  std::vector<double> one(d.size(), 1.0);
  return kernels::weighted_dot(w, f.span(), one);
}

double dirichlet_inner(const ScalarField& f, const ScalarField& g) {
  require_same_domain(f, g, "dirichlet_inner");
  const GridDomain& d = f.domain();
  if (d.is_box()) return kernels::box_dirichlet(f.span(), g.span(), d.nx(), d.ny(), d.hx(), d.hy());
  if (d.stencil == TorusStencil::five_point)
    return kernels::periodic_dirichlet(f.span(), g.span(), d.nx(), d.ny(), d.hx(), d.hy());
  return periodic_fourier(d).dirichlet(f.span(), g.span());
}

double mean(const ScalarField& f) { return integrate(f) / f.domain().area(); }

ScalarField project_mean_zero(const ScalarField& f) {
  if (!f.domain().is_torus()) throw DomainError("mean-zero projection is defined on the torus only");
  ScalarField out = f;
  out += -mean(f);
  return out;
}

bool is_mean_zero(const ScalarField& f, double rel) {
  return std::abs(integrate(f)) <= rel * f.domain().area() * std::max(f.max_abs(), 1e-300);
}

ScalarField laplacian_fourth_order(const ScalarField& f) {
  const GridDomain& d = f.domain();
  const int nx = d.nx(), ny = d.ny();
  const double ix2 = 1.0 / (12.0 * d.hx() * d.hx()), iy2 = 1.0 / (12.0 * d.hy() * d.hy());
  ScalarField out(d, std::nan(""));
  const bool torus = d.is_torus();
  auto val = [&](int i, int j) {
    if (torus) {
      i = (i % nx + nx) % nx;
      j = (j % ny + ny) % ny;
    }
    return f(i, j);
  };
  const int lo = torus ? 0 : 2;
  const int hix = torus ? nx : nx - 2, hiy = torus ? ny : ny - 2;
  for (int i = lo; i < hix; ++i)
    for (int j = lo; j < hiy; ++j) {
      const double c = val(i, j);
      out(i, j) = (-val(i - 2, j) + 16.0 * val(i - 1, j) - 30.0 * c + 16.0 * val(i + 1, j) - val(i + 2, j)) * ix2 +
                  (-val(i, j - 2) + 16.0 * val(i, j - 1) - 30.0 * c + 16.0 * val(i, j + 1) - val(i, j + 2)) * iy2;
    }
  return out;
}

}  // namespace vortex
