#pragma once

#include <stdexcept>
#include <vector>

#include "vortex/background.hpp"
#include "vortex/grid.hpp"
#include "vortex/params.hpp"

namespace vortex {

// shift[0] is f, shift[i] (i = 1..M) is f_i. Box-edge nodes carry the Dirichlet data
// that makes u = u_i = 0 on the edge (see plane_boundary_state).
struct PlaneState {
  std::vector<ScalarField> shift;
};

struct PlaneFields {
  ScalarField total;                 // u = sum_k u_k^0 + f
  // u_i = u_i^0 + f_i
  std::vector<ScalarField> species;
};

struct PlaneOptions {
  double tol = 1e-8;
  int max_iter = 20000;
  int memory = 12;
};

struct SolverStats {
  double energy = 0.0;
  double grad_norm = 0.0;
  int iterations = 0;
  int evaluations = 0;
  bool clamped = false;
  bool converged = false;
  double seconds = 0.0;
  std::vector<double> energy_trace;
};

struct PlaneSolution {
  ModelParams params;
  VortexSet vortices;
  BackgroundPlane bg;
  PlaneState state;
  PlaneFields fields;
  SolverStats stats;
};

class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& what, double grad_norm, int iterations)
      : std::runtime_error(what), grad_norm(grad_norm), iterations(iterations) {}
  double grad_norm;
  int iterations;
};

class PlaneNonConvergence : public SolverError {
 public:
  PlaneNonConvergence(const std::string& what, PlaneSolution last)
      : SolverError(what, last.stats.grad_norm, last.stats.iterations), last(std::move(last)) {}
  PlaneSolution last;
};

// zero in the interior, edge values f = -sum_k u_k^0, f_i = -u_i^0
PlaneState plane_boundary_state(const BackgroundPlane& bg);

double plane_energy(const PlaneState& s, const BackgroundPlane& bg, const ModelParams& p);
// L2 gradient; box-edge rows are zero
PlaneState plane_gradient(const PlaneState& s, const BackgroundPlane& bg, const ModelParams& p);
// residual Delta f - rhs of the substituted equations at interior nodes
PlaneState plane_residual(const PlaneState& s, const BackgroundPlane& bg, const ModelParams& p);

PlaneFields reconstruct(const PlaneState& s, const BackgroundPlane& bg);

PlaneSolution solve_plane(const ModelParams& p, const VortexSet& vs, const GridDomain& d,
                          const PlaneOptions& opt = {});

// smallest L with 2 sqrt(2) min(alpha, beta) L >= 25
double default_half_width(const ModelParams& p);

}  // namespace vortex
