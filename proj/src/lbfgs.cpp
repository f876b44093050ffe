#include "vortex/lbfgs.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

namespace vortex::opt {

double max_abs(const Vec& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

namespace {

void axpy(double a, const Vec& x, Vec& y) {
  for (std::size_t k = 0; k < y.size(); ++k) y[k] += a * x[k];
}

struct Pair {
  Vec s, y;
  double rho;
};

struct LineSearch {
  const Objective& obj;
  const Vec& x;
  const Vec& d;
  double dphi0;
  const LbfgsOptions& opt;
  int evals = 0;
  int rejected = 0;
  Vec g;  // gradient at the accepted point

  double phi(double t) {
    ++evals;
    const double v = obj.delta(x, d, t);
    if (!std::isfinite(v)) {
      ++rejected;
      return std::numeric_limits<double>::infinity();
    }
    return v;
  }

  double dphi(double t) {
    Vec xt = x;
    axpy(t, d, xt);
    obj.evaluate(xt, &g);
    return obj.dot(g, d);
  }

  double interpolate(double lo, double flo, double dlo, double hi, double fhi) const {
    // minimizer of the quadratic through (lo, flo, dlo) and (hi, fhi), safeguarded
    const double w = hi - lo;
    if (std::isfinite(fhi)) {
      const double denom = 2.0 * (fhi - flo - dlo * w);
      if (denom > 0.0) {
        const double t = lo - dlo * w * w / denom;
        const double a = std::min(lo, hi), b = std::max(lo, hi);
        const double margin = 0.1 * (b - a);
        if (t > a + margin && t < b - margin) return t;
      }
    }
    return 0.5 * (lo + hi);
  }

  // returns accepted step (0 on failure); value change in *fchange
  double run(double t0, double* fchange) {
    const double inf = std::numeric_limits<double>::infinity();
    double tprev = 0.0, fprev = 0.0, dprev = dphi0;
    double t = t0;
    double best_t = 0.0, best_f = 0.0;
    for (int i = 0; i < opt.max_line_evals; ++i) {
      const double f = phi(t);
      if (f < best_f && f <= opt.c1 * t * dphi0) {
        best_t = t;
        best_f = f;
      }
      if (f > opt.c1 * t * dphi0 || (i > 0 && f >= fprev) || f == inf)
        return zoom(tprev, fprev, dprev, t, f, fchange, best_t, best_f);
      const double df = dphi(t);
      if (std::abs(df) <= -opt.c2 * dphi0) {
        *fchange = f;
        return t;
      }
      if (df >= 0.0) return zoom(t, f, df, tprev, fprev, fchange, best_t, best_f);
      tprev = t;
      fprev = f;
      dprev = df;
      t *= 2.0;
    }
    return finish(best_t, best_f, fchange);
  }

  double zoom(double lo, double flo, double dlo, double hi, double fhi, double* fchange,
              double best_t, double best_f) {
    for (int i = evals; i < opt.max_line_evals; ++i) {
      const double t = interpolate(lo, flo, dlo, hi, fhi);
      if (t == lo || t == hi) break;
      const double f = phi(t);
      if (f < best_f && f <= opt.c1 * t * dphi0) {
        best_t = t;
        best_f = f;
      }
      if (f > opt.c1 * t * dphi0 || f >= flo) {
        hi = t;
        fhi = f;
        continue;
      }
      const double df = dphi(t);
      if (std::abs(df) <= -opt.c2 * dphi0) {
        *fchange = f;
        return t;
      }
      if (df * (hi - lo) >= 0.0) {
        hi = lo;
        fhi = flo;
      }
      lo = t;
      flo = f;
      dlo = df;
    }
    return finish(best_t, best_f, fchange);
  }

  // sufficient decrease without the curvature condition
  double finish(double best_t, double best_f, double* fchange) {
    if (best_t > 0.0) {
      dphi(best_t);
      *fchange = best_f;
    }
    return best_t;
  }
};

}  // namespace

LbfgsResult lbfgs(const Objective& obj, Vec x0, const LbfgsOptions& opt) {
  auto norm = [&](const Vec& g) { return obj.grad_norm ? obj.grad_norm(g) : max_abs(g); };
  auto precond = [&](const Vec& r, Vec& z) {
    if (obj.precondition)
      obj.precondition(r, z);
    else
      z = r;
  };

  LbfgsResult res;
  res.x = std::move(x0);
  Vec g;
  double f = obj.evaluate(res.x, &g);
  res.evaluations = 1;
  res.values.push_back(f);
  std::deque<Pair> mem;
  Vec d(res.x.size()), q, z;

  for (int it = 0;; ++it) {
    res.grad_norm = norm(g);
    if (res.grad_norm <= opt.tol) {
      res.converged = true;
      res.message = "gradient tolerance reached";
      break;
    }
    if (it >= opt.max_iter) {
      res.message = "iteration limit reached";
      break;
    }

    // two-loop recursion
    q = g;
    std::vector<double> a(mem.size());
    for (int k = static_cast<int>(mem.size()) - 1; k >= 0; --k) {
      a[k] = mem[k].rho * obj.dot(mem[k].s, q);
      axpy(-a[k], mem[k].y, q);
    }
    precond(q, z);
    if (!mem.empty()) {
      const Pair& last = mem.back();
      Vec py;
      precond(last.y, py);
      const double scale = obj.dot(last.s, last.y) / obj.dot(last.y, py);
      for (double& v : z) v *= scale;
    }
    for (std::size_t k = 0; k < mem.size(); ++k) {
      const double b = mem[k].rho * obj.dot(mem[k].y, z);
      axpy(a[k] - b, mem[k].s, z);
    }
    for (std::size_t k = 0; k < d.size(); ++k) d[k] = -z[k];

    double dphi0 = obj.dot(g, d);
    if (!(dphi0 < 0.0)) {
      mem.clear();
      precond(g, z);
      for (std::size_t k = 0; k < d.size(); ++k) d[k] = -z[k];
      dphi0 = obj.dot(g, d);
    }

    LineSearch ls{obj, res.x, d, dphi0, opt, 0, 0, {}};
    double fchange = 0.0;
    double t = ls.run(1.0, &fchange);
    res.evaluations += ls.evals;
    res.rejected_trials += ls.rejected;
    if (t == 0.0 && !mem.empty()) {
      // stale curvature pairs: restart from the preconditioned gradient
      mem.clear();
      precond(g, z);
      for (std::size_t k = 0; k < d.size(); ++k) d[k] = -z[k];
      LineSearch retry{obj, res.x, d, obj.dot(g, d), opt, 0, 0, {}};
      t = retry.run(1.0, &fchange);
      res.evaluations += retry.evals;
      res.rejected_trials += retry.rejected;
      if (t > 0.0) ls.g = std::move(retry.g);
    }
    if (t == 0.0 || !(fchange < 0.0)) {
      res.message = "line search failed to decrease the objective";
      break;
    }

    Pair p;
    p.s = d;
    for (double& v : p.s) v *= t;
    axpy(1.0, p.s, res.x);
    p.y = ls.g;
    axpy(-1.0, g, p.y);
    const double sy = obj.dot(p.s, p.y);
    g = std::move(ls.g);
    f += fchange;
    res.values.push_back(f);
    res.iterations = it + 1;
    if (sy > 1e-14 * std::sqrt(obj.dot(p.s, p.s) * obj.dot(p.y, p.y))) {
      p.rho = 1.0 / sy;
      mem.push_back(std::move(p));
      if (static_cast<int>(mem.size()) > opt.memory) mem.pop_front();
    }
  }
  // re-evaluate to shed accumulated drift in the running value
  res.value = obj.evaluate(res.x, nullptr);
  return res;
}

}  // namespace vortex::opt
