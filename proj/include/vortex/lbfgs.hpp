#pragma once

#include <functional>
#include <string>
#include <vector>

namespace vortex::opt {

using Vec = std::vector<double>;

// Smooth objective on a flat vector. `evaluate` returns the value and, when
// g is non-null, the gradient in the inner product `dot`. `delta` returns
// f(x + t d) - f(x) without cancellation; it may return +inf for trial points
// outside the feasible set.
struct Objective {
  std::function<double(const Vec& x, Vec* g)> evaluate;
  std::function<double(const Vec& x, const Vec& d, double t)> delta;
  std::function<double(const Vec& a, const Vec& b)> dot;
  std::function<void(const Vec& r, Vec& z)> precondition;  // z ~ H^{-1} r; identity if empty
  std::function<double(const Vec& g)> grad_norm;           // stopping measure; max-abs if empty
};

struct LbfgsOptions {
  int memory = 12;
  int max_iter = 5000;
  double tol = 1e-8;
  double c1 = 1e-4;
  double c2 = 0.9;
  int max_line_evals = 40;
};

struct LbfgsResult {
  Vec x;
  double value = 0.0;
  double grad_norm = 0.0;
  int iterations = 0;
  int evaluations = 0;
  int rejected_trials = 0;  // trial points with infinite delta
  bool converged = false;
  std::string message;
  std::vector<double> values;  // value after each accepted step, starting with f(x0)
};

LbfgsResult lbfgs(const Objective& obj, Vec x0, const LbfgsOptions& opt);

double max_abs(const Vec& v);

}  // namespace vortex::opt
