#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "vortex/torus.hpp"

namespace vortex {

struct MountainPassOptions {
  int path_nodes = 17;
  double tol = 1e-10;         // gradient max-norm at the returned critical point
  double separation = 1e-3;   // minimal L2 distance from the first solution
  double endpoint_margin = 1.0;
  double probe_radius = 1e-2;  // L2 radius of the local-minimality probe
  int probe_directions = 8;
  double descent_tol = 1e-6;  // hand-over gradient for the Newton polish
  int descent_max_iter = 3000;
  int newton_max_iter = 60;
  std::uint64_t seed = 1;
};

struct MountainPassReport {
  double endpoint_shift = 0.0;  // c~ added to u at the far end of the path
  double endpoint_energy = 0.0;
  std::vector<double> path_shifts;
  std::vector<double> path_energies;
  double barrier_shift = 0.0;  // refined location of the path maximum
  double barrier_energy = 0.0;
  double relaxed_shift = 0.0;  // u-mean shift on the lower constraint root
  double probe_min_rise = 0.0;  // min over the probe sphere of I - I(first)
  int descent_iterations = 0;
  int newton_iterations = 0;
  double separation = 0.0;
};

class MountainPassError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct MountainPassResult {
  TorusSolution second;
  MountainPassReport report;
};

// constant shift of u whose endpoint energy drops by more than 1 + margin
double mountain_pass_endpoint(const ModelParams& p, int n, double area, double margin);

MountainPassResult mountain_pass(const TorusSolution& first, const MountainPassOptions& o = {});

}  // namespace vortex
