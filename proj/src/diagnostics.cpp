#include "vortex/diagnostics.hpp"

#include <cmath>
#include <numbers>

#include "json.hpp"

namespace vortex {

namespace {

constexpr double kPi = std::numbers::pi;

double relative(double computed, double target) {
  const double err = std::abs(computed - target);
  return target == 0.0 ? err : err / std::abs(target);
}

QuantizedIntegral quantized(std::string name, int species, long double computed, double target) {
  return {std::move(name), species, static_cast<double>(computed), target,
          relative(static_cast<double>(computed), target)};
}

double max_masked(const ScalarField& f, const std::vector<unsigned char>& skip) {
  double m = 0.0;
  for (std::size_t k = 0; k < f.size(); ++k)
    if (!skip[k] && std::isfinite(f[k])) m = std::max(m, std::abs(f[k]));
  return m;
}

BoundCheck bound(std::string name, const GridDomain& d, const std::vector<unsigned char>& skip,
                 double tol, auto&& value) {
  BoundCheck c;
  c.name = std::move(name);
  c.worst = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < d.nx(); ++i)
    for (int j = 0; j < d.ny(); ++j) {
      const std::size_t k = d.index(i, j);
      if (skip[k]) continue;
      const double v = value(k);
      if (v > c.worst || std::isnan(v)) {
        c.worst = v;
        c.i = i;
        c.j = j;
        if (std::isnan(v)) break;
      }
    }
  c.status = c.worst <= tol ? CheckStatus::pass : CheckStatus::fail;
  return c;
}

}  // namespace

const char* to_string(CheckStatus s) {
  switch (s) {
    case CheckStatus::pass: return "pass";
    case CheckStatus::fail: return "fail";
    case CheckStatus::not_applicable: return "not_applicable";
  }
  return "not_applicable";
}

std::vector<unsigned char> vortex_patch_mask(const VortexSet& vs, const GridDomain& d) {
  std::vector<unsigned char> mask(d.size(), 0);
  for (const auto& [ci, cj] : vortex_nodes(vs, d))
    for (int di = -1; di <= 1; ++di)
      for (int dj = -1; dj <= 1; ++dj) {
        int i = ci + di, j = cj + dj;
        if (d.is_torus()) {
          i = (i + d.nx()) % d.nx();
          j = (j + d.ny()) % d.ny();
        } else if (i < 0 || j < 0 || i >= d.nx() || j >= d.ny()) {
          continue;
        }
        mask[d.index(i, j)] = 1;
      }
  return mask;
}

std::vector<QuantizedIntegral> plane_quantized_integrals(const PlaneFields& f, const VortexSet& vs,
                                                         const ModelParams& p) {
  const GridDomain& d = f.total.domain();
  const int m = static_cast<int>(f.species.size());
  const std::vector<double> w = quadrature_weights(d);
  long double total = 0.0L;
  std::vector<long double> per(m, 0.0L);
  std::vector<double> plus(m), minus(m);
  for (std::size_t k = 0; k < d.size(); ++k) {
    double s1 = 0.0, s2 = 0.0, sq = 0.0;
    for (int i = 0; i < m; ++i) {
      plus[i] = std::exp(f.total[k] + f.species[i][k]);
      minus[i] = std::exp(f.total[k] - f.species[i][k]);
      s1 += plus[i] + minus[i] - 2.0;
      s2 += plus[i] + minus[i];
      sq += (plus[i] - minus[i]) * (plus[i] - minus[i]);
    }
    total += w[k] * (p.alpha * p.alpha / (m * m) * s1 * s2 + p.alpha * p.beta / m * sq);
    for (int i = 0; i < m; ++i)
      per[i] += w[k] * (p.alpha * p.beta / m * s1 * (plus[i] - minus[i]) +
                        p.beta * p.beta * (plus[i] * plus[i] - minus[i] * minus[i]));
  }
  std::vector<QuantizedIntegral> out;
  out.push_back(quantized("total", 0, total, -4.0 * kPi * vs.total()));
  for (int i = 0; i < m; ++i)
    out.push_back(quantized("species_" + std::to_string(i + 1), i + 1, per[i], -4.0 * kPi * vs.count(i)));
  return out;
}

std::vector<QuantizedIntegral> torus_quantized_integrals(const GaugeFields& g, int n,
                                                         const ModelParams& p) {
  const GridDomain& d = g.big_u.domain();
  long double first = 0.0L, second = 0.0L;
  for (std::size_t k = 0; k < d.size(); ++k) {
    const double a = std::exp(g.big_u[k] + g.big_v[k]), b = std::exp(g.big_u[k] - g.big_v[k]);
    first += p.alpha * p.alpha * (a + b) * (a + b - 2.0) + p.alpha * p.beta * (a - b) * (a - b);
    second += p.alpha * p.beta * (a - b) * (a + b - 2.0) + p.beta * p.beta * (a * a - b * b);
  }
  const double target = -4.0 * kPi * n;
  return {quantized("first", 0, first * d.cell_area(), target),
          quantized("second", 0, second * d.cell_area(), target)};
}

ResidualPair plane_pde_residual(const PlaneState& s, const BackgroundPlane& bg,
                                const ModelParams& p, const VortexSet& vs) {
  const GridDomain& d = bg.u0_sum.domain();
  std::vector<unsigned char> skip = vortex_patch_mask(vs, d);
  for (int i = 0; i < d.nx(); ++i)
    for (int j = 0; j < d.ny(); ++j)
      if (d.on_boundary(i, j)) skip[d.index(i, j)] = 1;
  const PlaneState r = plane_residual(s, bg, p);
  ResidualPair out;
  for (std::size_t k = 0; k < r.shift.size(); ++k) {
    out.same_operator = std::max(out.same_operator, max_masked(r.shift[k], skip));
    // swap the 5-point Laplacian for the 4th-order one and the solver's
    // source for the analytic one
    const ScalarField& h = k == 0 ? bg.h_sum : bg.h[k - 1];
    const ScalarField& src = k == 0 ? bg.source_sum : bg.source[k - 1];
    ScalarField r4 = r.shift[k];
    r4 += laplacian_fourth_order(s.shift[k]);
    r4 -= laplacian(s.shift[k]);
    r4 -= h;
    r4 += src;
    out.fourth_order = std::max(out.fourth_order, max_masked(r4, skip));
  }
  return out;
}

ResidualPair torus_pde_residual(const TorusFields& f, const BackgroundTorus& bg,
                                const ModelParams& p, const VortexSet& vs) {
  const GridDomain& d = bg.u0.domain();
  const std::vector<unsigned char> skip = vortex_patch_mask(vs, d);
  const auto [ru, rv] = torus_residual(f.u, f.v, bg, p);
  const double ps = 0.5 * (1.0 / p.alpha + 1.0 / p.beta), pc = 0.5 * (1.0 / p.alpha - 1.0 / p.beta);
  const ScalarField du = laplacian_fourth_order(f.u) - laplacian(f.u);
  const ScalarField dv = laplacian_fourth_order(f.v) - laplacian(f.v);
  ScalarField ru4 = ru, rv4 = rv;
  ru4.axpy(ps, du).axpy(pc, dv);
  rv4.axpy(pc, du).axpy(ps, dv);
  return {std::max(max_masked(ru, skip), max_masked(rv, skip)),
          std::max(max_masked(ru4, skip), max_masked(rv4, skip))};
}

std::vector<RaySample> decay_profile(const PlaneFields& f, int rays, double inner, double outer) {
  const GridDomain& d = f.total.domain();
  if (!d.is_box()) throw DomainError("decay profile needs a box domain");
  if (rays < 1 || !(inner > 0.0) || !(inner < outer) || !(outer < 1.0))
    throw std::invalid_argument("decay profile: need rays >= 1 and 0 < inner < outer < 1");
  ScalarField value(d);
  for (std::size_t k = 0; k < d.size(); ++k) {
    double v = f.total[k] * f.total[k];
    for (const auto& s : f.species) v += s[k] * s[k];
    value[k] = v;
  }
  const double half = d.ext1, h = d.hx();
  auto sample = [&](double x, double y) {
    const double gx = (x + half) / h, gy = (y + half) / d.hy();
    const int i = std::clamp(static_cast<int>(std::floor(gx)), 0, d.nx() - 2);
    const int j = std::clamp(static_cast<int>(std::floor(gy)), 0, d.ny() - 2);
    const double tx = gx - i, ty = gy - j;
    return (1 - tx) * (1 - ty) * value(i, j) + tx * (1 - ty) * value(i + 1, j) +
           (1 - tx) * ty * value(i, j + 1) + tx * ty * value(i + 1, j + 1);
  };
  std::vector<RaySample> out;
  const double r0 = inner * half, r1 = outer * half;
  const int steps = std::max(2, static_cast<int>(std::floor((r1 - r0) / h)) + 1);
  for (int k = 0; k < rays; ++k) {
    const double th = 2.0 * kPi * k / rays;
    for (int s = 0; s < steps; ++s) {
      const double r = r0 + (r1 - r0) * s / (steps - 1);
      out.push_back({k, r, sample(r * std::cos(th), r * std::sin(th))});
    }
  }
  return out;
}

DecayFit decay_fit(const PlaneFields& f, const ModelParams& p, int rays, double inner,
                   double outer) {
  const auto samples = decay_profile(f, rays, inner, outer);
  DecayFit fit;
  fit.r_min = inner * f.total.domain().ext1;
  fit.r_max = outer * f.total.domain().ext1;
  fit.rays = rays;
  fit.expected_m = 2.0 * std::numbers::sqrt2 * std::min(p.alpha, p.beta);
  double slope_sum = 0.0;
  std::size_t at = 0;
  for (int k = 0; k < rays; ++k) {
    double sr = 0.0, sl = 0.0, srr = 0.0, srl = 0.0;
    int cnt = 0;
    for (; at < samples.size() && samples[at].ray == k; ++at) {
      const auto& s = samples[at];
      if (!(s.value >= 1e-280))
        throw DecayFitError("decay fit: annulus value " + std::to_string(s.value) + " at r = " +
                            std::to_string(s.r) + " is below 1e-280; shrink the box or the annulus");
      const double l = std::log(s.value);
      sr += s.r;
      sl += l;
      srr += s.r * s.r;
      srl += s.r * l;
      ++cnt;
    }
    slope_sum += (cnt * srl - sr * sl) / (cnt * srr - sr * sr);
  }
  fit.slope = slope_sum / rays;
  fit.rel_dev = std::abs(fit.slope + fit.expected_m) / fit.expected_m;
  return fit;
}

std::vector<BoundCheck> max_principle_check(const GaugeFields& g, const VortexSet& vs, double tol) {
  const GridDomain& d = g.big_u.domain();
  const auto skip = vortex_patch_mask(vs, d);
  const auto& u = g.big_u;
  const auto& v = g.big_v;
  return {bound("U", d, skip, tol, [&](std::size_t k) { return u[k]; }),
          bound("U+V", d, skip, tol, [&](std::size_t k) { return u[k] + v[k]; }),
          bound("U-V", d, skip, tol, [&](std::size_t k) { return u[k] - v[k]; })};
}

std::vector<BoundCheck> plane_sign_check(const PlaneFields& f, const VortexSet& vs, double tol) {
  const GridDomain& d = f.total.domain();
  auto skip = vortex_patch_mask(vs, d);
  for (int i = 0; i < d.nx(); ++i)
    for (int j = 0; j < d.ny(); ++j)
      if (d.on_boundary(i, j)) skip[d.index(i, j)] = 1;
  std::vector<BoundCheck> out;
  out.push_back(bound("u", d, skip, tol, [&](std::size_t k) { return f.total[k]; }));
  for (std::size_t i = 0; i < f.species.size(); ++i)
    out.push_back(bound("u_" + std::to_string(i + 1), d, skip, tol, [&](std::size_t k) { return f.species[i][k]; }));
  return out;
}

std::vector<std::string> failed_checks(const SolveReport& r, const ReportThresholds& t) {
  std::vector<std::string> out;
  if (r.converged && !*r.converged) out.push_back("convergence");
  const double qt = r.mode == "torus" ? t.quantized_torus : t.quantized_plane;
  for (const auto& q : r.quantized)
    if (!(q.rel_error <= qt)) out.push_back("quantized." + q.name);
  if (!(r.residual.same_operator <= t.residual)) out.push_back("pde_residual");
  if (t.decay && r.decay && !(r.decay->rel_dev <= *t.decay)) out.push_back("decay");
  for (const auto& b : r.max_principle)
    if (b.status == CheckStatus::fail) out.push_back("max_principle." + b.name);
  return out;
}

namespace {

using ojson = nlohmann::ordered_json;

ojson number_or_null(double x) { return std::isfinite(x) ? ojson(x) : ojson(nullptr); }

ojson to_ojson(const SolveReport& r) {
  ojson j;
  j["mode"] = r.mode;
  j["label"] = r.label;
  j["energy"] = number_or_null(r.energy);
  j["grad_norm"] = number_or_null(r.grad_norm);
  j["converged"] = r.converged ? ojson(*r.converged) : ojson(nullptr);
  ojson q = ojson::array();
  for (const auto& x : r.quantized) {
    ojson e;
    e["name"] = x.name;
    e["species"] = x.species;
    e["computed"] = number_or_null(x.computed);
    e["target"] = x.target;
    e["rel_error"] = number_or_null(x.rel_error);
    q.push_back(e);
  }
  j["quantized"] = q;
  j["pde_residual_max"] = number_or_null(r.residual.same_operator);
  j["pde_residual_fourth_order"] = number_or_null(r.residual.fourth_order);
  if (r.decay) {
    ojson dj;
    dj["r_min"] = r.decay->r_min;
    dj["r_max"] = r.decay->r_max;
    dj["rays"] = r.decay->rays;
    dj["slope"] = number_or_null(r.decay->slope);
    dj["expected_m"] = r.decay->expected_m;
    dj["rel_dev"] = number_or_null(r.decay->rel_dev);
    j["decay"] = dj;
  } else {
    j["decay"] = nullptr;
  }
  ojson mp = ojson::array();
  for (const auto& b : r.max_principle) {
    ojson e;
    e["bound"] = b.name;
    e["status"] = to_string(b.status);
    e["worst"] = number_or_null(b.worst);
    e["node"] = {b.i, b.j};
    mp.push_back(e);
  }
  j["max_principle"] = mp;
  j["feasibility_margin"] = r.feasibility_margin ? number_or_null(*r.feasibility_margin) : ojson(nullptr);
  j["iterations"] = r.iterations ? ojson(*r.iterations) : ojson(nullptr);
  j["wall_time"] = r.wall_time ? number_or_null(*r.wall_time) : ojson(nullptr);
  ojson extra = ojson::object();
  for (const auto& [k, v] : r.extra) extra[k] = number_or_null(v);
  j["extra"] = extra;
  j["notes"] = r.notes;
  return j;
}

}  // namespace

std::string report_json(const SolveReport& r) { return to_ojson(r).dump(2) + "\n"; }

std::string report_json(const std::vector<SolveReport>& reports) {
  ojson a = ojson::array();
  for (const auto& r : reports) a.push_back(to_ojson(r));
  ojson j;
  j["schema_version"] = 1;
  j["reports"] = a;
  return j.dump(2) + "\n";
}

}  // namespace vortex
