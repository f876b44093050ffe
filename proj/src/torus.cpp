#include "vortex/torus.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numbers>

#include "vortex/fourier.hpp"
#include "vortex/kernels.hpp"
#include "vortex/minres.hpp"

namespace vortex {

using opt::Vec;

namespace {

constexpr double kPi = std::numbers::pi;

double require_finite_value(double v, const char* what) {
  if (!std::isfinite(v)) throw std::overflow_error(std::string(what) + ": non-finite value");
  return v;
}

void check_torus_fields(const ScalarField& u, const ScalarField& v, const BackgroundTorus& bg) {
  require_same_domain(u, bg.u0, "torus field");
  require_same_domain(v, bg.u0, "torus field");
  if (!u.domain().is_torus()) throw DomainError("torus functional needs a torus domain");
}

}  // namespace

double torus_gamma(const ModelParams& p) {
  if (!(p.alpha > 0.0) || !(p.beta > p.alpha))
    throw std::invalid_argument("torus system requires beta > alpha > 0");
  return (p.beta - p.alpha) / (p.beta + p.alpha);
}

Feasibility feasibility(const ModelParams& p, int n, double area) {
  if (n < 0 || !(area > 0.0)) throw std::invalid_argument("feasibility needs n >= 0 and area > 0");
  Feasibility f;
  f.margin = p.alpha * p.beta * area - 8.0 * kPi * n;
  f.feasible = f.margin >= 0.0;
  return f;
}

ExpMoments exp_moments(const ScalarField& uz, const ScalarField& vz, const BackgroundTorus& bg) {
  check_torus_fields(uz, vz, bg);
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(uz.size());
  const double* u0 = bg.u0.data();
  const double* u = uz.data();
  const double* v = vz.data();
  // extended accumulators: the terms are nearly equal and the reduced
  // energy multiplies these sums by 2 alpha
  long double sa = 0.0L, sb = 0.0L, saa = 0.0L, sbb = 0.0L, sab = 0.0L;
#pragma omp parallel for schedule(static) reduction(+ : sa, sb, saa, sbb, sab)
  for (std::ptrdiff_t k = 0; k < n; ++k) {
    const double a = std::exp(u0[k] + u[k]), b = std::exp(v[k]);
    sa += a;
    sb += b;
    saa += a * a;
    sbb += b * b;
    sab += a * b;
  }
  const double w = uz.domain().cell_area();
  ExpMoments m{static_cast<double>(sa) * w, static_cast<double>(sb) * w,
               static_cast<double>(saa) * w, static_cast<double>(sbb) * w,
               static_cast<double>(sab) * w};
  for (double x : {m.a, m.b, m.aa, m.bb, m.ab}) require_finite_value(x, "exponential moments");
  return m;
}

ConstraintCoeffs constraint_coeffs(const ExpMoments& m, double u_mean, double v_mean,
                                   const ModelParams& p) {
  ConstraintCoeffs c;
  c.gamma = torus_gamma(p);
  c.linear_u = (1.0 - c.gamma) * m.a + c.gamma * std::exp(v_mean) * m.ab;
  c.linear_v = (1.0 - c.gamma) * m.b + c.gamma * std::exp(u_mean) * m.ab;
  require_finite_value(c.linear_u, "constraint coefficient");
  require_finite_value(c.linear_v, "constraint coefficient");
  return c;
}

AdmissibilitySlack admissibility_slack(const ExpMoments& m, int n, const ModelParams& p) {
  const double g = torus_gamma(p);
  const double k = 8.0 * kPi * n / ((1.0 - g) * (1.0 - g) * p.alpha * p.beta);
  return {m.a * m.a - k * m.aa, m.b * m.b - g * k * m.bb};
}

bool admissible(const ScalarField& uz, const ScalarField& vz, const BackgroundTorus& bg,
                const ModelParams& p) {
  return admissibility_slack(exp_moments(uz, vz, bg), bg.n, p).admissible();
}

std::pair<double, double> constraint_residuals(const ExpMoments& m, double u_mean, double v_mean,
                                               int n, const ModelParams& p) {
  const auto c = constraint_coeffs(m, u_mean, v_mean, p);
  const double x = std::exp(u_mean), y = std::exp(v_mean);
  const double ku = 2.0 * kPi * n / (p.alpha * p.beta), kv = c.gamma * ku;
  const double t1 = x * x * m.aa, t2 = x * c.linear_u;
  const double s1 = y * y * m.bb, s2 = y * c.linear_v;
  return {std::abs(t1 - t2 + ku) / std::max({t1, t2, ku}),
          std::abs(s1 - s2 + kv) / std::max({s1, s2, kv})};
}

MeanMaps::MeanMaps(const ExpMoments& moments, int n, const ModelParams& p)
    : m(moments), gamma(torus_gamma(p)) {
  k_u = 8.0 * kPi * n / (p.alpha * p.beta);
  k_v = gamma * k_u;
}

namespace {

// roots of aa X^2 - q X + k/4 = 0
double quadratic_root(double aa, double q, double k, RootBranch br) {
  const double disc = q * q - k * aa;
  if (!(disc >= 0.0))
    throw InadmissibleError("constraint has no real solution (negative discriminant)");
  const double s = std::sqrt(disc);
  if (br == RootBranch::upper) return (q + s) / (2.0 * aa);
  return 0.5 * k / (q + s);
}

}  // namespace

double MeanMaps::map_u(double y, RootBranch br) const {
  return quadratic_root(m.aa, (1.0 - gamma) * m.a + gamma * y * m.ab, k_u, br);
}

double MeanMaps::map_v(double x, RootBranch br) const {
  return quadratic_root(m.bb, (1.0 - gamma) * m.b + gamma * x * m.ab, k_v, br);
}

double MeanMaps::dmap_u(double y) const {
  const double q = (1.0 - gamma) * m.a + gamma * y * m.ab;
  return gamma * map_u(y) * m.ab / std::sqrt(q * q - k_u * m.aa);
}

double MeanMaps::dmap_v(double x) const {
  const double q = (1.0 - gamma) * m.b + gamma * x * m.ab;
  return gamma * map_v(x) * m.ab / std::sqrt(q * q - k_v * m.bb);
}

double MeanMaps::fixed_point_residual(double x) const { return x - map_u(map_v(x)); }

double MeanMaps::fixed_point_derivative(double x) const {
  return 1.0 - dmap_u(map_v(x)) * dmap_v(x);
}

MeanSolution solve_means(const ExpMoments& m, int n, const ModelParams& p, RootMethod method) {
  if (!admissibility_slack(m, n, p).admissible())
    throw InadmissibleError("fields are outside the admissible set");
  const MeanMaps maps(m, n, p);
  MeanSolution out;
  // F(lo) <= 0 since both maps increase; F(X)/X -> 1 - gamma^2 > 0 brackets from above
  double lo = maps.map_u(maps.map_v(0.0));
  double hi = 2.0 * lo;
  while (maps.fixed_point_residual(hi) <= 0.0) {
    lo = hi;
    hi *= 2.0;
    if (!std::isfinite(hi)) throw std::runtime_error("mean solve: bracket did not close");
  }
  double x = 0.5 * (lo + hi);
  for (int it = 0; it < 400; ++it) {
    out.iterations = it + 1;
    const double f = maps.fixed_point_residual(x);
    if (f == 0.0) break;
    if (f < 0.0) lo = x;
    else hi = x;
    double next = 0.5 * (lo + hi);
    if (method == RootMethod::newton) {
      const double nt = x - f / maps.fixed_point_derivative(x);
      if (nt > lo && nt < hi) next = nt;
      if (std::abs(next - x) <= 1e-15 * x) {
        x = next;
        break;
      }
    } else if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * hi) {
      x = next;
      break;
    }
    x = next;
  }
  out.u_mean = std::log(x);
  out.v_mean = std::log(maps.map_v(x));
  return out;
}

MeanSolution solve_means(const ScalarField& uz, const ScalarField& vz, const BackgroundTorus& bg,
                         const ModelParams& p, RootMethod method) {
  return solve_means(exp_moments(uz, vz, bg), bg.n, p, method);
}

// ---- full functional ----

TorusFunctional::TorusFunctional(const BackgroundTorus& bg, const ModelParams& p)
    : bg_(bg), p_(p), d_(bg.u0.domain()), s_(d_.size()) {
  if (!d_.is_torus()) throw DomainError("torus functional needs a torus domain");
  diff_sum_ = 0.5 * (1.0 / p.alpha + 1.0 / p.beta);
  diff_cross_ = 0.5 * (1.0 / p.alpha - 1.0 / p.beta);
  load_u_ = 8.0 * kPi * bg.n * diff_sum_ / d_.area();
  load_v_ = 8.0 * kPi * bg.n * diff_cross_ / d_.area();
}

Vec TorusFunctional::pack(const ScalarField& u, const ScalarField& v) const {
  check_torus_fields(u, v, bg_);
  Vec x(2 * s_);
  std::copy(u.values().begin(), u.values().end(), x.begin());
  std::copy(v.values().begin(), v.values().end(), x.begin() + s_);
  return x;
}

TorusFields TorusFunctional::unpack(const Vec& x) const {
  return {ScalarField(d_, Vec(x.begin(), x.begin() + s_)), ScalarField(d_, Vec(x.begin() + s_, x.end()))};
}

void TorusFunctional::laplacian(const double* f, double* out) const {
  if (d_.stencil == TorusStencil::five_point)
    kernels::periodic_laplacian({f, s_}, {out, s_}, d_.nx(), d_.ny(), d_.hx(), d_.hy());
  else
    periodic_fourier(d_).laplacian({f, s_}, {out, s_});
}

double TorusFunctional::dot(const Vec& a, const Vec& b) const {
  double acc = 0.0;
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(a.size());
#pragma omp parallel for schedule(static) reduction(+ : acc)
  for (std::ptrdiff_t k = 0; k < n; ++k) acc += a[k] * b[k];
  return acc * d_.cell_area();
}

void TorusFunctional::project_mean_zero(Vec& x) const {
  for (std::size_t h = 0; h < x.size(); h += s_) {
    double m = 0.0;
    for (std::size_t k = 0; k < s_; ++k) m += x[h + k];
    m /= static_cast<double>(s_);
    for (std::size_t k = 0; k < s_; ++k) x[h + k] -= m;
  }
}

double TorusFunctional::energy_gradient(const Vec& x, Vec& g, bool* clamped) const {
  const double* u = x.data();
  const double* v = x.data() + s_;
  Vec lu(s_), lv(s_);
  laplacian(u, lu.data());
  laplacian(v, lv.data());
  g.assign(2 * s_, 0.0);
  kernels::TorusNodes tn{s_, p_.alpha, p_.beta, d_.cell_area(), bg_.u0.data(), u, v};
  const auto pot = kernels::torus_potential(tn, g.data(), g.data() + s_);
  if (clamped) *clamped = pot.clamped;
  double duu = 0.0, dvv = 0.0, duv = 0.0, su = 0.0, sv = 0.0;
  const double a = diff_sum_, b = diff_cross_;
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(s_);
#pragma omp parallel for schedule(static) reduction(+ : duu, dvv, duv, su, sv)
  for (std::ptrdiff_t k = 0; k < n; ++k) {
    duu -= u[k] * lu[k];
    dvv -= v[k] * lv[k];
    duv -= u[k] * lv[k];
    su += u[k];
    sv += v[k];
    g[k] += -a * lu[k] - b * lv[k] + load_u_;
    g[s_ + k] += -b * lu[k] - a * lv[k] + load_v_;
  }
  const double w = d_.cell_area();
  const double e = w * (0.5 * a * (duu + dvv) + b * duv + load_u_ * su + load_v_ * sv) + pot.value;
  return require_finite_value(e, "torus energy");
}

double TorusFunctional::energy(const Vec& x, bool* clamped) const {
  Vec g;
  return energy_gradient(x, g, clamped);
}

double TorusFunctional::delta(const Vec& x, const Vec& s) const {
  const double* u = x.data();
  const double* v = x.data() + s_;
  const double* du = s.data();
  const double* dv = s.data() + s_;
  Vec lu(s_), lv(s_), ldu(s_), ldv(s_);
  laplacian(u, lu.data());
  laplacian(v, lv.data());
  laplacian(du, ldu.data());
  laplacian(dv, ldv.data());
  // D(f, g) = -int f Lap g
  double d_u_du = 0.0, d_du_du = 0.0, d_v_dv = 0.0, d_dv_dv = 0.0, cross = 0.0, su = 0.0, sv = 0.0;
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(s_);
#pragma omp parallel for schedule(static) reduction(+ : d_u_du, d_du_du, d_v_dv, d_dv_dv, cross, su, sv)
  for (std::ptrdiff_t k = 0; k < n; ++k) {
    d_u_du -= du[k] * lu[k];
    d_du_du -= du[k] * ldu[k];
    d_v_dv -= dv[k] * lv[k];
    d_dv_dv -= dv[k] * ldv[k];
    cross -= du[k] * lv[k] + u[k] * ldv[k] + du[k] * ldv[k];
    su += du[k];
    sv += dv[k];
  }
  kernels::TorusNodes tn{s_, p_.alpha, p_.beta, d_.cell_area(), bg_.u0.data(), u, v};
  const auto pot = kernels::torus_potential_delta(tn, du, dv, 1.0);
  const double w = d_.cell_area();
  return w * (0.5 * diff_sum_ * (2.0 * d_u_du + d_du_du + 2.0 * d_v_dv + d_dv_dv) +
              diff_cross_ * cross + load_u_ * su + load_v_ * sv) +
         pot.value;
}

TorusFunctional::Curvature TorusFunctional::curvature(const Vec& x) const {
  Curvature c;
  c.uu.resize(s_);
  c.uv.resize(s_);
  c.vv.resize(s_);
  const double al = p_.alpha, be = p_.beta;
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(s_);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t k = 0; k < n; ++k) {
    const double a = std::exp(std::min(bg_.u0[k] + x[k], kernels::kExpClamp));
    const double b = std::exp(std::min(x[s_ + k], kernels::kExpClamp));
    const double pa = 2.0 * al * (a + b - 2.0) + 2.0 * be * (a - b);
    const double pb = 2.0 * al * (a + b - 2.0) - 2.0 * be * (a - b);
    c.uu[k] = a * pa + 2.0 * (al + be) * a * a;
    c.uv[k] = 2.0 * (al - be) * a * b;
    c.vv[k] = b * pb + 2.0 * (al + be) * b * b;
  }
  return c;
}

void TorusFunctional::hessian_apply(const Curvature& c, const Vec& d, Vec& out) const {
  Vec lu(s_), lv(s_);
  laplacian(d.data(), lu.data());
  laplacian(d.data() + s_, lv.data());
  out.resize(2 * s_);
  const double a = diff_sum_, b = diff_cross_;
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(s_);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t k = 0; k < n; ++k) {
    const double du = d[k], dv = d[s_ + k];
    out[k] = -a * lu[k] - b * lv[k] + c.uu[k] * du + c.uv[k] * dv;
    out[s_ + k] = -b * lu[k] - a * lv[k] + c.uv[k] * du + c.vv[k] * dv;
  }
}

void TorusFunctional::block_solve(const Vec& r, Vec& z, double su, double cuv, double sv) const {
  z.resize(2 * s_);
  const double a = diff_sum_, b = diff_cross_;
  periodic_fourier(d_).apply_block(
      {r.data(), s_}, {r.data() + s_, s_}, {z.data(), s_}, {z.data() + s_, s_},
      [=](double sym) {
        const double k = -sym;
        const double m11 = a * k + su, m12 = b * k + cuv, m22 = a * k + sv;
        const double det = m11 * m22 - m12 * m12;
        return std::array<double, 4>{m22 / det, -m12 / det, -m12 / det, m11 / det};
      });
}

void TorusFunctional::vacuum_precondition(const Vec& r, Vec& z) const {
  const double s = 2.0 * (p_.alpha + p_.beta);
  block_solve(r, z, s, 2.0 * (p_.alpha - p_.beta), s);
}

// ---- field-level wrappers ----

double torus_energy(const ScalarField& u, const ScalarField& v, const BackgroundTorus& bg,
                    const ModelParams& p) {
  const TorusFunctional fn(bg, p);
  return fn.energy(fn.pack(u, v));
}

std::pair<ScalarField, ScalarField> torus_gradient(const ScalarField& u, const ScalarField& v,
                                                   const BackgroundTorus& bg,
                                                   const ModelParams& p) {
  const TorusFunctional fn(bg, p);
  Vec g;
  fn.energy_gradient(fn.pack(u, v), g);
  auto f = fn.unpack(g);
  return {std::move(f.u), std::move(f.v)};
}

std::pair<ScalarField, ScalarField> torus_residual(const ScalarField& u, const ScalarField& v,
                                                   const BackgroundTorus& bg,
                                                   const ModelParams& p) {
  auto g = torus_gradient(u, v, bg, p);
  g.first *= -1.0;
  g.second *= -1.0;
  return g;
}

double reduced_energy(const ScalarField& uz, const ScalarField& vz, const MeanSolution& means,
                      const BackgroundTorus& bg, const ModelParams& p) {
  check_torus_fields(uz, vz, bg);
  const ExpMoments m = exp_moments(uz, vz, bg);
  const double a = 0.5 * (1.0 / p.alpha + 1.0 / p.beta), b = 0.5 * (1.0 / p.alpha - 1.0 / p.beta);
  const double area = uz.domain().area();
  const double n = bg.n;
  const double grad = 0.5 * a * (dirichlet_inner(uz, uz) + dirichlet_inner(vz, vz)) +
                      b * dirichlet_inner(uz, vz);
  const double bulk = 2.0 * p.alpha *
                      ((area - std::exp(means.u_mean) * m.a) + (area - std::exp(means.v_mean) * m.b));
  return grad + bulk - 4.0 * kPi * n / p.alpha + 8.0 * kPi * n * a * means.u_mean +
         8.0 * kPi * n * b * means.v_mean;
}

double reduced_energy(const ScalarField& uz, const ScalarField& vz, const BackgroundTorus& bg,
                      const ModelParams& p) {
  return reduced_energy(uz, vz, solve_means(uz, vz, bg, p), bg, p);
}

TorusFields torus_fields(const TorusState& s) {
  TorusFields f{s.u_zero_mean, s.v_zero_mean};
  f.u += s.u_mean;
  f.v += s.v_mean;
  return f;
}

GaugeFields gauge_fields(const TorusFields& f, const BackgroundTorus& bg) {
  GaugeFields g{0.5 * (bg.u0 + f.u + f.v), 0.5 * (bg.u0 + f.u - f.v)};
  return g;
}

// ---- seed ----

TarantelloResult tarantello_init(const BackgroundTorus& bg, double lam, const TarantelloOptions& o) {
  if (!(lam > 0.0)) throw std::invalid_argument("seed coupling must be positive");
  const GridDomain& d = bg.u0.domain();
  const std::size_t s = d.size();
  const double load = 8.0 * kPi * bg.n / d.area();
  const PeriodicFourier& pf = periodic_fourier(d);
  auto lap = [&](const Vec& f, Vec& out) {
    out.resize(s);
    if (d.stencil == TorusStencil::five_point)
      kernels::periodic_laplacian(f, out, d.nx(), d.ny(), d.hx(), d.hy());
    else
      pf.laplacian(f, out);
  };
  auto residual = [&](const Vec& w, Vec& r) {
    lap(w, r);
    for (std::size_t k = 0; k < s; ++k) {
      const double e = std::exp(bg.u0[k] + w[k]);
      r[k] -= lam * e * std::expm1(bg.u0[k] + w[k]) + load;
    }
    return opt::max_abs(r);
  };
  auto l2 = [&](const Vec& r) {
    double acc = 0.0;
    for (double x : r) acc += x * x;
    return std::sqrt(acc * d.cell_area());
  };
  auto dot = [&](const Vec& a, const Vec& b) {
    double acc = 0.0;
    for (std::size_t k = 0; k < s; ++k) acc += a[k] * b[k];
    return acc * d.cell_area();
  };

  TarantelloResult res;
  Vec w(s);
  for (std::size_t k = 0; k < s; ++k) w[k] = -bg.u0[k];
  Vec r, rn, diag(s), step, trial(s);
  res.residual = residual(w, r);
  while (res.residual > o.tol) {
    if (res.iterations++ >= o.max_iter)
      throw std::runtime_error("seed Newton did not converge; try a larger seed coupling");
    for (std::size_t k = 0; k < s; ++k) {
      const double e = std::exp(bg.u0[k] + w[k]);
      diag[k] = lam * e * (2.0 * e - 1.0);
    }
    // (-Lap + diag) step = r
    auto apply_a = [&](const Vec& x, Vec& y) {
      lap(x, y);
      for (std::size_t k = 0; k < s; ++k) y[k] = diag[k] * x[k] - y[k];
    };
    auto apply_m = [&](const Vec& x, Vec& y) {
      y.resize(s);
      pf.apply(x, y, [lam](double sym) { return 1.0 / (lam - sym); });
    };
    opt::minres(apply_a, apply_m, dot, r, step, 1e-12, 500);
    const double base = l2(r);
    double t = 1.0, rt = 0.0;
    for (;;) {
      for (std::size_t k = 0; k < s; ++k) trial[k] = w[k] + t * step[k];
      rt = residual(trial, rn);
      if (std::isfinite(rt) && l2(rn) < base) break;
      t *= 0.5;
      if (t < 1e-6) throw std::runtime_error("seed Newton stalled; try a larger seed coupling");
    }
    w = trial;
    r.swap(rn);
    res.residual = rt;
  }
  res.w = ScalarField(d, std::move(w));
  return res;
}

// ---- constrained minimization ----

TorusSolution make_torus_solution(const ModelParams& p, const VortexSet& vs,
                                  const BackgroundTorus& bg, const ScalarField& u,
                                  const ScalarField& v) {
  TorusSolution sol;
  sol.params = p;
  sol.vortices = vs;
  sol.bg = bg;
  sol.state.u_mean = mean(u);
  sol.state.v_mean = mean(v);
  sol.state.u_zero_mean = project_mean_zero(u);
  sol.state.v_zero_mean = project_mean_zero(v);
  sol.fields = {u, v};
  sol.gauge = gauge_fields(sol.fields, sol.bg);
  const TorusFunctional fn(sol.bg, p);
  Vec g;
  bool clamped = false;
  sol.stats.energy = fn.energy_gradient(fn.pack(u, v), g, &clamped);
  sol.stats.grad_norm = opt::max_abs(g);
  sol.stats.clamped = clamped;
  return sol;
}

TorusSolution minimize_torus(const ModelParams& p, const VortexSet& vs, const GridDomain& d,
                             const TorusOptions& o) {
  p.validate_torus();
  if (!d.is_torus()) throw DomainError("torus solver needs a torus domain");
  const auto t0 = std::chrono::steady_clock::now();
  const BackgroundTorus bg = torus_background(vs, d);
  const Feasibility fe = feasibility(p, bg.n, d.area());
  if (!fe.feasible)
    throw InfeasibleError("no solution can exist: alpha beta |Omega| < 8 pi n", fe.margin);

  const TorusFunctional fn(bg, p);
  const std::size_t s = fn.nodes();
  Vec y(2 * s, 0.0);
  auto moments = [&](const Vec& z) {
    const auto f = fn.unpack(z);
    return exp_moments(f.u, f.v, bg);
  };
  auto full = [&](const Vec& z, const MeanSolution& ms) {
    Vec x = z;
    for (std::size_t k = 0; k < s; ++k) {
      x[k] += ms.u_mean;
      x[s + k] += ms.v_mean;
    }
    return x;
  };
  {
    const double g = torus_gamma(p);
    if (p.alpha * p.beta * (1.0 - g) * (1.0 - g) * d.area() < 8.0 * kPi * bg.n)
      throw InadmissibleError(
          "admissible set is empty: alpha beta (1-gamma)^2 |Omega| < 8 pi n, although the necessary "
          "condition holds");
  }
  if (o.seed == TorusSeed::tarantello && bg.n > 0) {
    // with the default coupling, raise it until the seed is admissible
    double lam = o.lambda_t > 0.0 ? o.lambda_t : 4.0 * p.alpha * p.beta;
    for (int attempt = 0;; ++attempt) {
      const auto seed = tarantello_init(bg, lam);
      std::copy(seed.w.values().begin(), seed.w.values().end(), y.begin());
      fn.project_mean_zero(y);
      if (o.lambda_t > 0.0 || attempt == 8 || admissibility_slack(moments(y), bg.n, p).admissible()) break;
      lam *= 4.0;
    }
  }
  if (!admissibility_slack(moments(y), bg.n, p).admissible())
    throw InadmissibleError("initial state is outside the admissible set; increase the seed coupling");

  opt::Objective obj;
  obj.evaluate = [&](const Vec& z, Vec* g) {
    const MeanSolution ms = solve_means(moments(z), bg.n, p);
    const Vec x = full(z, ms);
    Vec gx;
    const double e = fn.energy_gradient(x, gx);
    if (g) {
      *g = std::move(gx);
      fn.project_mean_zero(*g);
    }
    return e;
  };
  obj.delta = [&](const Vec& z, const Vec& dir, double t) {
    Vec z2 = z;
    for (std::size_t k = 0; k < z2.size(); ++k) z2[k] += t * dir[k];
    const ExpMoments m2 = moments(z2);
    if (!admissibility_slack(m2, bg.n, p).admissible()) return std::numeric_limits<double>::infinity();
    const MeanSolution m0 = solve_means(moments(z), bg.n, p);
    const MeanSolution m1 = solve_means(m2, bg.n, p);
    Vec step(z.size());
    for (std::size_t k = 0; k < s; ++k) {
      step[k] = t * dir[k] + (m1.u_mean - m0.u_mean);
      step[s + k] = t * dir[s + k] + (m1.v_mean - m0.v_mean);
    }
    const double dv = fn.delta(full(z, m0), step);
    return std::isfinite(dv) ? dv : std::numeric_limits<double>::infinity();
  };
  obj.dot = [&](const Vec& a, const Vec& b) { return fn.dot(a, b); };
  obj.precondition = [&](const Vec& r, Vec& z) {
    fn.vacuum_precondition(r, z);
    fn.project_mean_zero(z);
  };

  opt::LbfgsOptions lo;
  lo.tol = o.tol;
  lo.max_iter = o.max_iter;
  lo.memory = o.memory;
  auto r = opt::lbfgs(obj, y, lo);

  const MeanSolution ms = solve_means(moments(r.x), bg.n, p);
  const auto f = fn.unpack(full(r.x, ms));
  TorusSolution sol = make_torus_solution(p, vs, bg, f.u, f.v);
  sol.stats.grad_norm = r.grad_norm;
  sol.stats.iterations = r.iterations;
  sol.stats.evaluations = r.evaluations;
  sol.stats.converged = r.converged;
  sol.stats.energy_trace = std::move(r.values);
  sol.rejected_trials = r.rejected_trials;
  sol.reduced_energy = reduced_energy(sol.state.u_zero_mean, sol.state.v_zero_mean, ms, bg, p);
  sol.stats.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (!r.converged) {
    const auto slack = admissibility_slack(moments(r.x), bg.n, p);
    const bool trapped = r.rejected_trials > 0;
    std::string msg = "torus minimizer did not converge: " + r.message;
    if (trapped) {
      const ExpMoments m = moments(r.x);
      const double ru = slack.u_part / (m.a * m.a), rv = slack.v_part / (m.b * m.b);
      msg += std::string("; steps were rejected at the admissible-set boundary (") +
             (ru <= rv ? "u constraint" : "v constraint") +
             " closest to violation); alpha may be below the existence threshold";
    }
    throw TorusNonConvergence(msg, std::move(sol), trapped);
  }
  return sol;
}

}  // namespace vortex
