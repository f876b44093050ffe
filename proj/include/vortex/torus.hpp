#pragma once

#include <string>
#include <utility>
#include <vector>

#include "vortex/background.hpp"
#include "vortex/grid.hpp"
#include "vortex/lbfgs.hpp"
#include "vortex/params.hpp"
#include "vortex/plane.hpp"

namespace vortex {

// u = u_zero_mean + u_mean, v = v_zero_mean + v_mean
struct TorusState {
  ScalarField u_zero_mean;
  ScalarField v_zero_mean;
  double u_mean = 0.0;
  double v_mean = 0.0;
};

struct TorusFields {
  ScalarField u;
  ScalarField v;
};

// U = u0/2 + (u+v)/2, V = u0/2 + (u-v)/2
struct GaugeFields {
  ScalarField big_u;
  ScalarField big_v;
};

// coefficients of the linear terms of the two quadratic constraints
struct ConstraintCoeffs {
  double linear_u = 0.0;
  double linear_v = 0.0;
  double gamma = 0.0;
};

// integrals of A = e^{u0+u'} and B = e^{v'}
struct ExpMoments {
  double a = 0.0;
  double b = 0.0;
  double aa = 0.0;
  double bb = 0.0;
  double ab = 0.0;
};

struct Feasibility {
  bool feasible = true;
  double margin = 0.0;  // alpha beta |Omega| - 8 pi n
};

struct AdmissibilitySlack {
  double u_part = 0.0;  // (int A)^2 - k_u int A^2; >= 0 inside the set
  double v_part = 0.0;
  bool admissible() const { return u_part >= 0.0 && v_part >= 0.0; }
};

enum class RootMethod { newton, bisection };
// which root of the quadratic constraint in e^{c} is taken
enum class RootBranch { upper, lower };

struct MeanSolution {
  double u_mean = 0.0;
  double v_mean = 0.0;
  int iterations = 0;
};

class InadmissibleError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

double torus_gamma(const ModelParams& p);
Feasibility feasibility(const ModelParams& p, int n, double area);

ExpMoments exp_moments(const ScalarField& u_zero_mean, const ScalarField& v_zero_mean,
                       const BackgroundTorus& bg);
ConstraintCoeffs constraint_coeffs(const ExpMoments& m, double u_mean, double v_mean,
                                   const ModelParams& p);
AdmissibilitySlack admissibility_slack(const ExpMoments& m, int n, const ModelParams& p);
bool admissible(const ScalarField& u_zero_mean, const ScalarField& v_zero_mean,
                const BackgroundTorus& bg, const ModelParams& p);

// residuals of the two constraints divided by their largest term
std::pair<double, double> constraint_residuals(const ExpMoments& m, double u_mean, double v_mean,
                                               int n, const ModelParams& p);

// Maps of e^{c} used by the fixed-point formulation. map_u(y) solves the
// first constraint for X = e^{c1} given e^{c2} = y; map_v the second.
struct MeanMaps {
  ExpMoments m;
  double gamma = 0.0;
  double k_u = 0.0;  // 8 pi n / (alpha beta)
  double k_v = 0.0;  // 8 gamma pi n / (alpha beta)

  MeanMaps(const ExpMoments& moments, int n, const ModelParams& p);
  double map_u(double y, RootBranch br = RootBranch::upper) const;
  double map_v(double x, RootBranch br = RootBranch::upper) const;
  double dmap_u(double y) const;  // upper branch
  double dmap_v(double x) const;
  // F(X) = X - map_u(map_v(X)) and its derivative
  double fixed_point_residual(double x) const;
  double fixed_point_derivative(double x) const;
};

MeanSolution solve_means(const ExpMoments& m, int n, const ModelParams& p,
                         RootMethod method = RootMethod::newton);
MeanSolution solve_means(const ScalarField& u_zero_mean, const ScalarField& v_zero_mean,
                         const BackgroundTorus& bg, const ModelParams& p,
                         RootMethod method = RootMethod::newton);

double torus_energy(const ScalarField& u, const ScalarField& v, const BackgroundTorus& bg,
                    const ModelParams& p);
// L2 gradient including the constant modes
std::pair<ScalarField, ScalarField> torus_gradient(const ScalarField& u, const ScalarField& v,
                                                   const BackgroundTorus& bg,
                                                   const ModelParams& p);
// residuals of the two field equations (negative of the gradient)
std::pair<ScalarField, ScalarField> torus_residual(const ScalarField& u, const ScalarField& v,
                                                   const BackgroundTorus& bg,
                                                   const ModelParams& p);
// energy after eliminating the constants, closed form
double reduced_energy(const ScalarField& u_zero_mean, const ScalarField& v_zero_mean,
                      const BackgroundTorus& bg, const ModelParams& p);
double reduced_energy(const ScalarField& u_zero_mean, const ScalarField& v_zero_mean,
                      const MeanSolution& means, const BackgroundTorus& bg, const ModelParams& p);

TorusFields torus_fields(const TorusState& s);
GaugeFields gauge_fields(const TorusFields& f, const BackgroundTorus& bg);

// Flat-vector form of the full functional, x = [u, v]; shared by the
// minimizer, the saddle search and the tests.
class TorusFunctional {
 public:
  TorusFunctional(const BackgroundTorus& bg, const ModelParams& p);

  std::size_t nodes() const { return s_; }
  const GridDomain& domain() const { return d_; }
  const ModelParams& params() const { return p_; }

  opt::Vec pack(const ScalarField& u, const ScalarField& v) const;
  TorusFields unpack(const opt::Vec& x) const;

  double energy(const opt::Vec& x, bool* clamped = nullptr) const;
  double energy_gradient(const opt::Vec& x, opt::Vec& g, bool* clamped = nullptr) const;
  // energy(x + s) - energy(x), free of cancellation
  double delta(const opt::Vec& x, const opt::Vec& s) const;

  struct Curvature {
    std::vector<double> uu, uv, vv;
  };
  Curvature curvature(const opt::Vec& x) const;
  void hessian_apply(const Curvature& c, const opt::Vec& d, opt::Vec& out) const;
  // inverse of the 2x2 Fourier block [[p k + su, q k + cuv], [q k + cuv, p k + sv]], k = -symbol
  void block_solve(const opt::Vec& r, opt::Vec& z, double su, double cuv, double sv) const;
  void vacuum_precondition(const opt::Vec& r, opt::Vec& z) const;

  double dot(const opt::Vec& a, const opt::Vec& b) const;
  void project_mean_zero(opt::Vec& x) const;

 private:
  void laplacian(const double* f, double* out) const;

  const BackgroundTorus& bg_;
  ModelParams p_;
  GridDomain d_;
  std::size_t s_;
  double diff_sum_;    // (1/alpha + 1/beta) / 2
  double diff_cross_;  // (1/alpha - 1/beta) / 2
  double load_u_;      // 8 pi n p / |Omega|
  double load_v_;
};

struct TarantelloOptions {
  double tol = 1e-9;
  int max_iter = 60;
};

struct TarantelloResult {
  ScalarField w;
  double residual = 0.0;
  int iterations = 0;
};

// Solves Delta w = lam e^{u0+w}(e^{u0+w}-1) + 8 pi n/|Omega| by damped Newton
// from w = -u0.
TarantelloResult tarantello_init(const BackgroundTorus& bg, double lam,
                                 const TarantelloOptions& o = {});

enum class TorusSeed { zero, tarantello };

struct TorusOptions {
  double tol = 1e-10;
  int max_iter = 5000;
  int memory = 12;
  TorusSeed seed = TorusSeed::tarantello;
  double lambda_t = 0.0;  // 0: 4 alpha beta
};

struct TorusSolution {
  ModelParams params;
  VortexSet vortices;
  BackgroundTorus bg;
  TorusState state;
  TorusFields fields;
  GaugeFields gauge;
  SolverStats stats;
  double reduced_energy = 0.0;
  int rejected_trials = 0;
};

class InfeasibleError : public std::runtime_error {
 public:
  InfeasibleError(const std::string& what, double margin) : std::runtime_error(what), margin(margin) {}
  double margin;
};

class TorusNonConvergence : public SolverError {
 public:
  TorusNonConvergence(const std::string& what, TorusSolution last, bool trapped)
      : SolverError(what, last.stats.grad_norm, last.stats.iterations),
        last(std::move(last)),
        boundary_trapped(trapped) {}
  TorusSolution last;
  bool boundary_trapped;
};

TorusSolution make_torus_solution(const ModelParams& p, const VortexSet& vs,
                                  const BackgroundTorus& bg, const ScalarField& u,
                                  const ScalarField& v);

TorusSolution minimize_torus(const ModelParams& p, const VortexSet& vs, const GridDomain& d,
                             const TorusOptions& o = {});

}  // namespace vortex
