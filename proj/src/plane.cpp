#include "vortex/plane.hpp"

#include <chrono>
#include <cmath>
#include <numbers>
#include <string>

#include "vortex/fourier.hpp"
#include "vortex/kernels.hpp"
#include "vortex/lbfgs.hpp"

namespace vortex {

namespace {

using opt::Vec;

// Flat layout: field k occupies [k*S, (k+1)*S), k = 0 for f, k = i for f_i.
class PlaneProblem {
 public:
  PlaneProblem(const BackgroundPlane& bg, const ModelParams& p)
      : bg_(bg), p_(p), d_(bg.u0_sum.domain()), m_(static_cast<int>(bg.u0.size())),
        s_(d_.size()), w_(quadrature_weights(d_)), interior_(s_, 0) {
    for (int i = 1; i < d_.nx() - 1; ++i)
      for (int j = 1; j < d_.ny() - 1; ++j) interior_[d_.index(i, j)] = 1;
  }

  std::size_t unknowns() const { return s_ * (m_ + 1); }

  Vec flatten(const PlaneState& st) const {
    Vec x(unknowns());
    for (int k = 0; k <= m_; ++k) std::copy(st.shift[k].values().begin(), st.shift[k].values().end(), x.begin() + k * s_);
    return x;
  }

  PlaneState unflatten(const Vec& x) const {
    PlaneState st;
    for (int k = 0; k <= m_; ++k)
      st.shift.emplace_back(d_, std::vector<double>(x.begin() + k * s_, x.begin() + (k + 1) * s_));
    return st;
  }

  kernels::PlaneNodes nodes(const double* x) const {
    kernels::PlaneNodes n;
    n.nodes = s_;
    n.species = m_;
    n.alpha = p_.alpha;
    n.beta = p_.beta;
    n.weight = w_.data();
    n.ubar = bg_.u0_sum.data();
    n.f = x;
    for (int i = 0; i < m_; ++i) {
      n.ui0.push_back(bg_.u0[i].data());
      n.fi.push_back(x + (i + 1) * s_);
    }
    return n;
  }

  std::span<const double> field(const double* x, int k) const { return {x + k * s_, s_}; }

  double dirichlet(const double* a, const double* b, int k) const {
    return kernels::box_dirichlet(field(a, k), field(b, k), d_.nx(), d_.ny(), d_.hx(), d_.hy());
  }

  double grad_coeff(int k) const { return k == 0 ? m_ / p_.alpha : 1.0 / p_.beta; }
  double source_coeff(int k) const { return k == 0 ? 2.0 * m_ / p_.alpha : 2.0 / p_.beta; }
  const ScalarField& source(int k) const { return k == 0 ? bg_.source_sum : bg_.source[k - 1]; }

  double energy(const Vec& x, bool* clamped = nullptr) const {
    double e = 0.0;
    for (int k = 0; k <= m_; ++k) {
      e += grad_coeff(k) * dirichlet(x.data(), x.data(), k);
      e += source_coeff(k) * kernels::weighted_dot(w_, field(x.data(), k), source(k).span());
    }
    const auto pot = kernels::plane_potential(nodes(x.data()), nullptr, {});
    if (clamped) *clamped = pot.clamped;
    return e + pot.value;
  }

  // L2 gradient, zero on box-edge nodes
  void gradient(const Vec& x, Vec& g) const {
    g.assign(unknowns(), 0.0);
    std::vector<double*> dfi;
    for (int i = 0; i < m_; ++i) dfi.push_back(g.data() + (i + 1) * s_);
    kernels::plane_potential(nodes(x.data()), g.data(), dfi);
    Vec lap(s_);
    for (int k = 0; k <= m_; ++k) {
      kernels::box_laplacian(field(x.data(), k), lap, d_.nx(), d_.ny(), d_.hx(), d_.hy());
      double* gk = g.data() + k * s_;
      const double a = 2.0 * grad_coeff(k), b = source_coeff(k);
      const double* h = source(k).data();
#pragma omp parallel for schedule(static)
      for (std::size_t n = 0; n < s_; ++n) gk[n] = interior_[n] ? gk[n] - a * lap[n] + b * h[n] : 0.0;
    }
  }

  double delta(const Vec& x, const Vec& dir, double t) const {
    double e = 0.0;
    for (int k = 0; k <= m_; ++k) {
      const double c = grad_coeff(k);
      e += c * t * (2.0 * dirichlet(x.data(), dir.data(), k) + t * dirichlet(dir.data(), dir.data(), k));
      e += t * source_coeff(k) * kernels::weighted_dot(w_, field(dir.data(), k), source(k).span());
    }
    std::vector<const double*> dfi;
    for (int i = 0; i < m_; ++i) dfi.push_back(dir.data() + (i + 1) * s_);
    const auto pot = kernels::plane_potential_delta(nodes(x.data()), dir.data(), dfi, t);
    return e + pot.value;
  }

  // inverse of the vacuum Hessian: (2c)(-Delta) + stiffness, per field
  void precondition(const Vec& r, Vec& z) const {
    z.assign(unknowns(), 0.0);
    const BoxSine& sine = box_sine(d_);
    const int mx = d_.nx() - 2, my = d_.ny() - 2;
    std::vector<double> in(static_cast<std::size_t>(mx) * my), out(in.size());
    for (int k = 0; k <= m_; ++k) {
      const double a = 2.0 * grad_coeff(k);
      const double c = k == 0 ? 8.0 * p_.alpha * m_ : 8.0 * p_.beta;
      for (int i = 0; i < mx; ++i)
        for (int j = 0; j < my; ++j) in[static_cast<std::size_t>(i) * my + j] = r[k * s_ + d_.index(i + 1, j + 1)];
      sine.apply(in, out, [a, c](double neg_lap) { return 1.0 / (a * neg_lap + c); });
      for (int i = 0; i < mx; ++i)
        for (int j = 0; j < my; ++j) z[k * s_ + d_.index(i + 1, j + 1)] = out[static_cast<std::size_t>(i) * my + j];
    }
  }

  double dot(const Vec& a, const Vec& b) const {
    double acc = 0.0;
#pragma omp parallel for schedule(static) reduction(+ : acc)
    for (std::size_t n = 0; n < a.size(); ++n) acc += a[n] * b[n];
    return acc * d_.cell_area();
  }

  std::size_t first_bad_node(const Vec& x) const {
    for (std::size_t n = 0; n < s_; ++n) {
      double e = bg_.u0_sum[n] + x[n];
      for (int i = 0; i < m_; ++i) {
        const double ui = bg_.u0[i][n] + x[(i + 1) * s_ + n];
        if (!std::isfinite(e + ui) || !std::isfinite(e - ui)) return n;
      }
      if (!std::isfinite(e)) return n;
    }
    return s_;
  }

  int species() const { return m_; }
  std::size_t nodes_per_field() const { return s_; }

 private:
  const BackgroundPlane& bg_;
  ModelParams p_;
  GridDomain d_;
  int m_;
  std::size_t s_;
  std::vector<double> w_;
  std::vector<unsigned char> interior_;
};

void check_state(const PlaneState& s, const BackgroundPlane& bg) {
  if (static_cast<int>(s.shift.size()) != static_cast<int>(bg.u0.size()) + 1)
    throw std::invalid_argument("plane state must hold M + 1 fields");
  for (const auto& f : s.shift) require_same_domain(f, bg.u0_sum, "plane state");
}

double checked(double e, const PlaneProblem& pb, const Vec& x) {
  if (!std::isfinite(e)) {
    const std::size_t n = pb.first_bad_node(x);
    throw std::runtime_error("plane energy: non-finite value at node " + std::to_string(n));
  }
  return e;
}

}  // namespace

PlaneState plane_boundary_state(const BackgroundPlane& bg) {
  const GridDomain& d = bg.u0_sum.domain();
  PlaneState s;
  s.shift.emplace_back(d);
  for (std::size_t k = 0; k < bg.u0.size(); ++k) s.shift.emplace_back(d);
  for (int i = 0; i < d.nx(); ++i)
    for (int j = 0; j < d.ny(); ++j) {
      if (!d.on_boundary(i, j)) continue;
      s.shift[0](i, j) = -bg.u0_sum(i, j);
      for (std::size_t k = 0; k < bg.u0.size(); ++k) s.shift[k + 1](i, j) = -bg.u0[k](i, j);
    }
  return s;
}

double plane_energy(const PlaneState& s, const BackgroundPlane& bg, const ModelParams& p) {
  check_state(s, bg);
  PlaneProblem pb(bg, p);
  const Vec x = pb.flatten(s);
  return checked(pb.energy(x), pb, x);
}

PlaneState plane_gradient(const PlaneState& s, const BackgroundPlane& bg, const ModelParams& p) {
  check_state(s, bg);
  PlaneProblem pb(bg, p);
  const Vec x = pb.flatten(s);
  checked(pb.energy(x), pb, x);
  Vec g;
  pb.gradient(x, g);
  return pb.unflatten(g);
}

PlaneState plane_residual(const PlaneState& s, const BackgroundPlane& bg, const ModelParams& p) {
  PlaneState r = plane_gradient(s, bg, p);
  const int m = static_cast<int>(bg.u0.size());
  r.shift[0] *= -p.alpha / (2.0 * m);
  for (int i = 1; i <= m; ++i) r.shift[i] *= -p.beta / 2.0;
  return r;
}

PlaneFields reconstruct(const PlaneState& s, const BackgroundPlane& bg) {
  check_state(s, bg);
  PlaneFields out;
  out.total = bg.u0_sum + s.shift[0];
  for (std::size_t i = 0; i < bg.u0.size(); ++i) out.species.push_back(bg.u0[i] + s.shift[i + 1]);
  return out;
}

double default_half_width(const ModelParams& p) {
  return 25.0 / (2.0 * std::numbers::sqrt2 * std::min(p.alpha, p.beta));
}

PlaneSolution solve_plane(const ModelParams& p, const VortexSet& vs, const GridDomain& d,
                          const PlaneOptions& o) {
  p.validate_plane();
  if (!d.is_box()) throw DomainError("plane solver needs a box domain");
  if (vs.species_count() != p.species)
    throw std::invalid_argument("vortex set has " + std::to_string(vs.species_count()) +
                                " species, parameters say M = " + std::to_string(p.species));
  for (const auto& sp : vs.species)
    for (const auto& pt : sp)
      if (d.ext1 - std::max(std::abs(pt.x), std::abs(pt.y)) < 0.25 * d.ext1)
        throw std::invalid_argument("vortex closer than L/4 to the box edge");

  const auto t0 = std::chrono::steady_clock::now();
  PlaneSolution sol;
  sol.params = p;
  sol.vortices = vs;
  sol.bg = plane_background(vs, p.lambda_bg, d);
  PlaneProblem pb(sol.bg, p);

  opt::Objective obj;
  obj.evaluate = [&](const Vec& x, Vec* g) {
    const double e = checked(pb.energy(x), pb, x);
    if (g) pb.gradient(x, *g);
    return e;
  };
  obj.delta = [&](const Vec& x, const Vec& dir, double t) { return pb.delta(x, dir, t); };
  obj.dot = [&](const Vec& a, const Vec& b) { return pb.dot(a, b); };
  obj.precondition = [&](const Vec& r, Vec& z) { pb.precondition(r, z); };

  opt::LbfgsOptions lo;
  lo.tol = o.tol;
  lo.max_iter = o.max_iter;
  lo.memory = o.memory;
  auto r = opt::lbfgs(obj, pb.flatten(plane_boundary_state(sol.bg)), lo);

  sol.state = pb.unflatten(r.x);
  sol.fields = reconstruct(sol.state, sol.bg);
  bool clamped = false;
  pb.energy(r.x, &clamped);
  sol.stats.energy = r.value;
  sol.stats.grad_norm = r.grad_norm;
  sol.stats.iterations = r.iterations;
  sol.stats.evaluations = r.evaluations;
  sol.stats.clamped = clamped;
  sol.stats.converged = r.converged;
  sol.stats.energy_trace = std::move(r.values);
  sol.stats.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (!r.converged)
    throw PlaneNonConvergence("plane solver did not converge: " + r.message + " (gradient " +
                                  std::to_string(r.grad_norm) + ")",
                              std::move(sol));
  return sol;
}

}  // namespace vortex
