#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace vortex {

enum class DomainKind : int { torus = 0, box = 1 };

// Fourier symbol used for torus derivatives. Both are diagonal in Fourier
// space; five_point is the symbol of the periodic 5-point stencil.
enum class TorusStencil : int { five_point = 0, spectral = 1 };

struct GridDomain {
  DomainKind kind = DomainKind::torus;
  int n1 = 0;  // torus: nodes per period; box: cells per side
  int n2 = 0;
  double ext1 = 0.0;  // torus: period; box: half-width
  double ext2 = 0.0;
  TorusStencil stencil = TorusStencil::five_point;

  static GridDomain torus(double l1, double l2, int n1, int n2,
                          TorusStencil s = TorusStencil::five_point);
  static GridDomain box(double half_width, int n);

  bool is_torus() const { return kind == DomainKind::torus; }
  bool is_box() const { return kind == DomainKind::box; }

  // stored nodes along each axis
  int nx() const { return is_box() ? n1 + 1 : n1; }
  int ny() const { return is_box() ? n2 + 1 : n2; }
  std::size_t size() const { return static_cast<std::size_t>(nx()) * ny(); }
  std::size_t index(int i, int j) const { return static_cast<std::size_t>(i) * ny() + j; }

  double hx() const { return is_box() ? 2.0 * ext1 / n1 : ext1 / n1; }
  double hy() const { return is_box() ? 2.0 * ext2 / n2 : ext2 / n2; }
  double cell_area() const { return hx() * hy(); }
  double area() const { return is_box() ? 4.0 * ext1 * ext2 : ext1 * ext2; }
  double x(int i) const { return is_box() ? -ext1 + i * hx() : i * hx(); }
  double y(int j) const { return is_box() ? -ext2 + j * hy() : j * hy(); }
  bool on_boundary(int i, int j) const {
    return is_box() && (i == 0 || j == 0 || i == nx() - 1 || j == ny() - 1);
  }

  void validate() const;
  bool operator==(const GridDomain&) const = default;
};

class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class ScalarField {
 public:
  ScalarField() = default;
  explicit ScalarField(const GridDomain& d, double fill = 0.0) : dom_(d), v_(d.size(), fill) {}
  ScalarField(const GridDomain& d, std::vector<double> values);

  const GridDomain& domain() const { return dom_; }
  std::size_t size() const { return v_.size(); }
  double* data() { return v_.data(); }
  const double* data() const { return v_.data(); }
  std::vector<double>& values() { return v_; }
  const std::vector<double>& values() const { return v_; }
  std::span<double> span() { return v_; }
  std::span<const double> span() const { return v_; }

  double& operator[](std::size_t k) { return v_[k]; }
  double operator[](std::size_t k) const { return v_[k]; }
  double& operator()(int i, int j) { return v_[dom_.index(i, j)]; }
  double operator()(int i, int j) const { return v_[dom_.index(i, j)]; }

  ScalarField& operator+=(const ScalarField& o);
  ScalarField& operator-=(const ScalarField& o);
  ScalarField& operator*=(double s);
  ScalarField& operator+=(double c);
  // this += s * o
  ScalarField& axpy(double s, const ScalarField& o);

  double max_abs() const;
  bool all_finite() const;

 private:
  GridDomain dom_;
  std::vector<double> v_;
};

ScalarField operator+(ScalarField a, const ScalarField& b);
ScalarField operator-(ScalarField a, const ScalarField& b);
ScalarField operator*(double s, ScalarField a);

void require_same_domain(const ScalarField& a, const ScalarField& b, const char* where);
void require_finite(const ScalarField& f, const char* what);

ScalarField laplacian(const ScalarField& f);
double integrate(const ScalarField& f);
double dirichlet_inner(const ScalarField& f, const ScalarField& g);
ScalarField project_mean_zero(const ScalarField& f);
double mean(const ScalarField& f);
bool is_mean_zero(const ScalarField& f, double rel = 1e-12);

// quadrature weight of each node (cell_area, halved on box edges)
std::vector<double> quadrature_weights(const GridDomain& d);

// 4th-order central Laplacian, 5 points per axis. On the box, nodes closer
// than two layers to the edge get NaN.
ScalarField laplacian_fourth_order(const ScalarField& f);

}  // namespace vortex
