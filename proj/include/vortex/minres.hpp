#pragma once

#include <functional>

#include "vortex/lbfgs.hpp"

namespace vortex::opt {

struct MinresResult {
  int iterations = 0;
  double residual = 0.0;  // preconditioned residual norm relative to the right-hand side
  bool converged = false;
};

// Preconditioned MINRES for symmetric (possibly indefinite) A with an SPD
// preconditioner M ~ A^{-1}; inner product `dot`. x starts at zero.
MinresResult minres(const std::function<void(const Vec&, Vec&)>& apply_a,
                    const std::function<void(const Vec&, Vec&)>& apply_m,
                    const std::function<double(const Vec&, const Vec&)>& dot, const Vec& b, Vec& x,
                    double rtol, int max_iter);

}  // namespace vortex::opt
