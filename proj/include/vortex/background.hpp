#pragma once

#include <utility>
#include <vector>

#include "vortex/grid.hpp"

namespace vortex {

struct VortexPoint {
  double x = 0.0;
  double y = 0.0;
  int multiplicity = 1;
};

struct VortexSet {
  std::vector<std::vector<VortexPoint>> species;

  int species_count() const { return static_cast<int>(species.size()); }
  int count(int i) const;
  int total() const;
};

// node (i, j) nearest to each vortex point, multiplicities ignored
std::vector<std::pair<int, int>> vortex_nodes(const VortexSet& vs, const GridDomain& d);

struct BackgroundPlane {
  double lambda = 0.0;
  std::vector<ScalarField> u0;  // per species
  std::vector<ScalarField> h;   // per species
  ScalarField u0_sum;
  ScalarField h_sum;
  // Source used by the solver: h_i within far_radius of some vortex, and
  // -Delta_h u_i^0 (5-point) beyond it, so the background's algebraic tail
  // cancels exactly on the grid.
  double far_radius = 0.0;
  std::vector<ScalarField> source;
  ScalarField source_sum;
};

struct BackgroundTorus {
  ScalarField u0;
  int n = 0;
};

BackgroundPlane plane_background(const VortexSet& vs, double lambda, const GridDomain& d);
BackgroundTorus torus_background(const VortexSet& vs, const GridDomain& d);

}  // namespace vortex
