#include "vortex/mountain_pass.hpp"

#include <chrono>
#include <cmath>
#include <numbers>
#include <random>

#include "vortex/lbfgs.hpp"
#include "vortex/minres.hpp"

namespace vortex {

using opt::Vec;

namespace {

double l2_norm(const TorusFunctional& fn, const Vec& x) { return std::sqrt(fn.dot(x, x)); }

Vec shifted(const Vec& x, std::size_t s, double c) {
  Vec y = x;
  for (std::size_t k = 0; k < s; ++k) y[k] += c;
  return y;
}

// maximizer of a unimodal function on [a, b]
template <class F>
double golden_max(F&& f, double a, double b, int iters) {
  const double r = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = b - r * (b - a), x2 = a + r * (b - a);
  double f1 = f(x1), f2 = f(x2);
  for (int i = 0; i < iters && std::abs(b - a) > 1e-12 * (1.0 + std::abs(a)); ++i) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + r * (b - a);
      f2 = f(x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - r * (b - a);
      f1 = f(x1);
    }
  }
  return f1 > f2 ? x1 : x2;
}

// fixed point of the constraint maps with the u mean on the lower root
MeanSolution lower_branch_means(const ExpMoments& m, int n, const ModelParams& p) {
  if (!admissibility_slack(m, n, p).admissible())
    throw InadmissibleError("fields are outside the admissible set");
  const MeanMaps maps(m, n, p);
  double ex = maps.map_u(maps.map_v(0.0, RootBranch::upper), RootBranch::lower), ey = 0.0;
  MeanSolution out;
  for (int it = 0; it < 500; ++it) {
    out.iterations = it + 1;
    ey = maps.map_v(ex, RootBranch::upper);
    const double nx = maps.map_u(ey, RootBranch::lower);
    const bool done = std::abs(nx - ex) <= 1e-15 * ex;
    ex = nx;
    if (done) break;
  }
  out.u_mean = std::log(ex);
  out.v_mean = std::log(maps.map_v(ex, RootBranch::upper));
  return out;
}

}  // namespace

double mountain_pass_endpoint(const ModelParams& p, int n, double area, double margin) {
  if (n <= 0) throw std::invalid_argument("mountain pass needs at least one vortex");
  return -((4.0 * p.alpha + p.beta) * area + 1.0 + margin) /
         (4.0 * std::numbers::pi * n * (1.0 / p.alpha + 1.0 / p.beta));
}

MountainPassResult mountain_pass(const TorusSolution& first, const MountainPassOptions& o) {
  if (o.path_nodes < 3) throw std::invalid_argument("mountain pass path needs at least 3 nodes");
  const auto t0 = std::chrono::steady_clock::now();
  const ModelParams& p = first.params;
  const BackgroundTorus& bg = first.bg;
  const TorusFunctional fn(bg, p);
  const std::size_t s = fn.nodes();
  const Vec x1 = fn.pack(first.fields.u, first.fields.v);
  const double e1 = fn.energy(x1);
  MountainPassResult out;
  MountainPassReport& rep = out.report;

  // local-minimality probe around the first solution
  {
    std::mt19937_64 rng(o.seed);
    std::normal_distribution<double> nd;
    rep.probe_min_rise = std::numeric_limits<double>::infinity();
    for (int k = 0; k < o.probe_directions; ++k) {
      Vec d(2 * s);
      for (auto& x : d) x = nd(rng);
      if (k == 0) std::fill(d.begin(), d.end(), 0.0), std::fill(d.begin(), d.begin() + s, 1.0);
      const double nrm = l2_norm(fn, d);
      for (auto& x : d) x *= o.probe_radius / nrm;
      rep.probe_min_rise = std::min(rep.probe_min_rise, fn.delta(x1, d));
    }
    if (!(rep.probe_min_rise > 0.0))
      throw MountainPassError("first solution is not a strict local minimizer on the probe sphere");
  }

  // path x1 + (c, 0), c from 0 to the endpoint, geometric in |c|
  double cend = mountain_pass_endpoint(p, bg.n, fn.domain().area(), o.endpoint_margin);
  rep.endpoint_energy = fn.energy(shifted(x1, s, cend));
  while (!(rep.endpoint_energy < e1 - 1.0)) {
    cend *= 2.0;
    rep.endpoint_energy = fn.energy(shifted(x1, s, cend));
  }
  rep.endpoint_shift = cend;
  const int np = o.path_nodes;
  const double step = std::log1p(-cend) / (np - 1);
  int imax = 0;
  for (int k = 0; k < np; ++k) {
    const double c = k == np - 1 ? cend : -std::expm1(k * step);
    rep.path_shifts.push_back(c);
    rep.path_energies.push_back(fn.energy(shifted(x1, s, c)));
    if (rep.path_energies[k] > rep.path_energies[imax]) imax = k;
  }
  if (imax == 0 || imax == np - 1)
    throw MountainPassError("path has no interior energy maximum");

  // refine the barrier along the path segment pair around the maximum
  auto along = [&](double c) { return fn.energy(shifted(x1, s, c)); };
  rep.barrier_shift =
      golden_max(along, rep.path_shifts[imax + 1], rep.path_shifts[imax - 1], 200);
  rep.barrier_energy = along(rep.barrier_shift);

  // The second critical point minimizes the reduced energy when the u mean
  // sits on the lower root of its constraint, the branch the barrier lies on.
  const ScalarField uz = project_mean_zero(first.fields.u), vz = project_mean_zero(first.fields.v);
  auto moments = [&](const Vec& z) {
    const auto f = fn.unpack(z);
    return exp_moments(f.u, f.v, bg);
  };
  auto means = [&](const Vec& z) { return lower_branch_means(moments(z), bg.n, p); };
  auto full = [&](const Vec& z, const MeanSolution& ms) {
    Vec y = z;
    for (std::size_t k = 0; k < s; ++k) {
      y[k] += ms.u_mean;
      y[s + k] += ms.v_mean;
    }
    return y;
  };
  Vec z = fn.pack(uz, vz);
  rep.relaxed_shift = means(z).u_mean - first.state.u_mean;

  opt::Objective obj;
  obj.evaluate = [&](const Vec& zz, Vec* g) {
    Vec gx;
    const double e = fn.energy_gradient(full(zz, means(zz)), gx);
    if (g) {
      *g = std::move(gx);
      fn.project_mean_zero(*g);
    }
    return e;
  };
  obj.delta = [&](const Vec& zz, const Vec& dir, double t) {
    Vec z2 = zz;
    for (std::size_t k = 0; k < z2.size(); ++k) z2[k] += t * dir[k];
    MeanSolution m1;
    try {
      m1 = means(z2);
    } catch (const InadmissibleError&) {
      return std::numeric_limits<double>::infinity();
    }
    const MeanSolution m0 = means(zz);
    Vec step(zz.size());
    for (std::size_t k = 0; k < s; ++k) {
      step[k] = t * dir[k] + (m1.u_mean - m0.u_mean);
      step[s + k] = t * dir[s + k] + (m1.v_mean - m0.v_mean);
    }
    const double dv = fn.delta(full(zz, m0), step);
    return std::isfinite(dv) ? dv : std::numeric_limits<double>::infinity();
  };
  obj.dot = [&](const Vec& a, const Vec& b) { return fn.dot(a, b); };
  obj.precondition = [&](const Vec& r, Vec& out) {
    fn.vacuum_precondition(r, out);
    fn.project_mean_zero(out);
  };
  opt::LbfgsOptions lo;
  lo.tol = o.descent_tol;
  lo.max_iter = o.descent_max_iter;
  lo.memory = 30;
  const auto lr = opt::lbfgs(obj, z, lo);
  rep.descent_iterations = lr.iterations;
  Vec x = full(lr.x, means(lr.x));

  Vec g;
  fn.energy_gradient(x, g);
  auto gnorm = [&](const Vec& v) { return l2_norm(fn, v); };

  // Newton on the gradient with backtracking on its L2 norm
  for (int it = 0; it < o.newton_max_iter && opt::max_abs(g) > o.tol; ++it) {
    const auto curv = fn.curvature(x);
    double su = 0.0, sv = 0.0;
    for (std::size_t k = 0; k < s; ++k) {
      su += std::abs(curv.uu[k]);
      sv += std::abs(curv.vv[k]);
    }
    su = su / s + 1e-3;
    sv = sv / s + 1e-3;
    auto apply_a = [&](const Vec& v, Vec& r) { fn.hessian_apply(curv, v, r); };
    auto apply_m = [&](const Vec& v, Vec& r) { fn.block_solve(v, r, su, 0.0, sv); };
    auto dot = [&](const Vec& a, const Vec& b) { return fn.dot(a, b); };
    Vec rhs = g, d;
    for (auto& v : rhs) v = -v;
    opt::minres(apply_a, apply_m, dot, rhs, d, 1e-8, 2000);
    const double g0 = gnorm(g);
    bool accepted = false;
    double t = 1.0;
    for (int ls = 0; ls < 40 && !accepted; ++ls, t *= 0.5) {
      Vec xt = x;
      for (std::size_t k = 0; k < xt.size(); ++k) xt[k] += t * d[k];
      Vec gt;
      try {
        fn.energy_gradient(xt, gt);
      } catch (const std::overflow_error&) {
        continue;
      }
      if (gnorm(gt) < g0) {
        x = std::move(xt);
        g = std::move(gt);
        accepted = true;
      }
    }
    ++rep.newton_iterations;
    if (!accepted) break;
  }

  const auto f = fn.unpack(x);
  out.second = make_torus_solution(p, first.vortices, bg, f.u, f.v);
  out.second.stats.iterations = rep.descent_iterations + rep.newton_iterations;
  out.second.stats.converged = opt::max_abs(g) <= o.tol;
  out.second.reduced_energy =
      reduced_energy(out.second.state.u_zero_mean, out.second.state.v_zero_mean,
                     {out.second.state.u_mean, out.second.state.v_mean, 0}, bg, p);
  Vec diff(2 * s);
  for (std::size_t k = 0; k < diff.size(); ++k) diff[k] = x[k] - x1[k];
  rep.separation = l2_norm(fn, diff);
  out.second.stats.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (rep.separation < o.separation)
    throw MountainPassError("path collapsed onto the first solution (separation " +
                            std::to_string(rep.separation) + ")");
  if (!out.second.stats.converged)
    throw MountainPassError("saddle polish stopped with gradient " +
                            std::to_string(out.second.stats.grad_norm));
  return out;
}

}  // namespace vortex
