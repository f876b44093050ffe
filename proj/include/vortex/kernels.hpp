#pragma once

// Node-wise grid kernels. Every kernel exists twice: vortex::kernels::serial
// is the plain reference loop, vortex::kernels (top level) is the OpenMP
// version used by the solvers. Tests hold them against each other.

#include <cstddef>
#include <span>
#include <vector>

namespace vortex::kernels {

inline constexpr double kExpClamp = 50.0;

struct PotentialSum {
  double value = 0.0;
  bool clamped = false;
};

// Plane potential for M species. ubar = sum_k u_k^0. Arrays are node-indexed
// and of equal length; weight holds quadrature weights.
struct PlaneNodes {
  std::size_t nodes = 0;
  int species = 0;
  double alpha = 0.0;
  double beta = 0.0;
  const double* weight = nullptr;
  const double* ubar = nullptr;
  std::vector<const double*> ui0;
  const double* f = nullptr;
  std::vector<const double*> fi;
};

// Torus potential alpha(a+b-2)^2 + beta(a-b)^2, a = e^{u0+u}, b = e^v.
struct TorusNodes {
  std::size_t nodes = 0;
  double alpha = 0.0;
  double beta = 0.0;
  double weight = 0.0;  // uniform cell area
  const double* u0 = nullptr;
  const double* u = nullptr;
  const double* v = nullptr;
};

void box_laplacian(std::span<const double> f, std::span<double> out, int nx, int ny, double hx,
                   double hy);
void periodic_laplacian(std::span<const double> f, std::span<double> out, int nx, int ny,
                        double hx, double hy);
double box_dirichlet(std::span<const double> f, std::span<const double> g, int nx, int ny,
                     double hx, double hy);
double periodic_dirichlet(std::span<const double> f, std::span<const double> g, int nx, int ny,
                          double hx, double hy);
double weighted_dot(std::span<const double> w, std::span<const double> f,
                    std::span<const double> g);
double sum(std::span<const double> f);
// dfo / dfio (nullable) receive the pointwise derivative of the potential density
PotentialSum plane_potential(const PlaneNodes& in, double* dfo, const std::vector<double*>& dfio);
// weighted sum of P(x + t d) - P(x), free of cancellation
PotentialSum plane_potential_delta(const PlaneNodes& in, const double* df,
                                   const std::vector<const double*>& dfi, double t);
PotentialSum torus_potential(const TorusNodes& in, double* du, double* dv);
PotentialSum torus_potential_delta(const TorusNodes& in, const double* du, const double* dv,
                                   double t);

namespace serial {
void box_laplacian(std::span<const double> f, std::span<double> out, int nx, int ny, double hx,
                   double hy);
void periodic_laplacian(std::span<const double> f, std::span<double> out, int nx, int ny,
                        double hx, double hy);
double box_dirichlet(std::span<const double> f, std::span<const double> g, int nx, int ny,
                     double hx, double hy);
double periodic_dirichlet(std::span<const double> f, std::span<const double> g, int nx, int ny,
                          double hx, double hy);
double weighted_dot(std::span<const double> w, std::span<const double> f,
                    std::span<const double> g);
double sum(std::span<const double> f);
// dfo / dfio (nullable) receive the pointwise derivative of the potential density
PotentialSum plane_potential(const PlaneNodes& in, double* dfo, const std::vector<double*>& dfio);
// weighted sum of P(x + t d) - P(x), free of cancellation
PotentialSum plane_potential_delta(const PlaneNodes& in, const double* df,
                                   const std::vector<const double*>& dfi, double t);
PotentialSum torus_potential(const TorusNodes& in, double* du, double* dv);
PotentialSum torus_potential_delta(const TorusNodes& in, const double* du, const double* dv,
                                   double t);
}  // namespace serial

}  // namespace vortex::kernels
