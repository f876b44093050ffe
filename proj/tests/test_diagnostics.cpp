#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "doctest.h"
#include "json.hpp"
#include "support.hpp"
#include "vortex/diagnostics.hpp"

using namespace vortex;
using std::numbers::pi;

namespace {

VortexSet vortices(std::vector<VortexPoint> pts) {
  VortexSet vs;
  vs.species.push_back(std::move(pts));
  return vs;
}

}  // namespace

TEST_CASE("quantized integrals vanish without vortices") {
  const auto b = GridDomain::box(5.0, 32);
  const PlaneFields pf{ScalarField(b), {ScalarField(b), ScalarField(b)}};
  VortexSet two;
  two.species.resize(2);
  const auto q = plane_quantized_integrals(pf, two, ModelParams{1.0, 1.0, 2});
  REQUIRE(q.size() == 3);
  CHECK(q[0].name == "total");
  CHECK(q[1].species == 1);
  for (const auto& x : q) {
    CHECK(x.computed == 0.0);
    CHECK(x.target == 0.0);
    CHECK(x.rel_error == 0.0);
  }

  const auto t = GridDomain::torus(2 * pi, 2 * pi, 32, 32);
  const GaugeFields g{ScalarField(t), ScalarField(t)};
  for (const auto& x : torus_quantized_integrals(g, 0, ModelParams{1.0, 2.0})) CHECK(x.computed == 0.0);
}

TEST_CASE("torus quantized integrals hold exactly on every constrained state") {
  const auto d = GridDomain::torus(2 * pi, 2 * pi, 64, 64);
  const ModelParams p{3.0, 4.5};
  const auto bg = torus_background(vortices({{pi, pi, 1}}), d);
  std::mt19937_64 rng(41);
  int checked = 0;
  for (int t = 0; t < 20 && checked < 5; ++t) {
    const ScalarField uz = project_mean_zero(-1.0 * bg.u0 + testing::smooth_random(d, rng, 0.3));
    const ScalarField vz = project_mean_zero(testing::smooth_random(d, rng, 0.3));
    if (!admissible(uz, vz, bg, p)) continue;
    const auto ms = solve_means(uz, vz, bg, p);
    const TorusFields f = torus_fields(TorusState{uz, vz, ms.u_mean, ms.v_mean});
    for (const auto& q : torus_quantized_integrals(gauge_fields(f, bg), 1, p)) {
      CHECK(q.target == doctest::Approx(-4 * pi));
      CHECK(q.rel_error <= 1e-9);
    }
    // the field equations themselves are far from satisfied
    CHECK(torus_pde_residual(f, bg, p, vortices({{pi, pi, 1}})).same_operator > 1e-3);
    ++checked;
  }
  CHECK(checked == 5);
}

TEST_CASE("maximum-principle check") {
  const auto d = GridDomain::torus(2 * pi, 2 * pi, 32, 32);
  const auto vs = vortices({{pi, pi, 1}});
  GaugeFields g{ScalarField(d, 0.1), ScalarField(d, 0.0)};
  auto checks = max_principle_check(g, vs);
  REQUIRE(checks.size() == 3);
  CHECK(checks[0].name == "U");
  CHECK(checks[0].status == CheckStatus::fail);
  CHECK(checks[0].worst == doctest::Approx(0.1));

  g = GaugeFields{ScalarField(d, -1.0), ScalarField(d, 0.5)};
  checks = max_principle_check(g, vs);
  CHECK(checks[0].status == CheckStatus::pass);
  CHECK(checks[1].status == CheckStatus::pass);  // U + V = -0.5
  CHECK(checks[2].status == CheckStatus::pass);  // U - V = -1.5
  g.big_v = ScalarField(d, 1.5);
  checks = max_principle_check(g, vs);
  CHECK(checks[1].status == CheckStatus::fail);
  CHECK(checks[2].status == CheckStatus::pass);

  // violations on the vortex patch are ignored
  g = GaugeFields{ScalarField(d, -1.0), ScalarField(d, 0.0)};
  const auto [vi, vj] = vortex_nodes(vs, d)[0];
  g.big_u(vi, vj) = 3.0;
  g.big_u((vi + 1) % 32, vj) = 3.0;
  CHECK(max_principle_check(g, vs)[0].status == CheckStatus::pass);
  g.big_u((vi + 2) % 32, vj) = 3.0;
  const auto bad = max_principle_check(g, vs)[0];
  CHECK(bad.status == CheckStatus::fail);
  CHECK(bad.i == (vi + 2) % 32);
  CHECK(bad.j == vj);

  const auto mask = vortex_patch_mask(vs, d);
  int count = 0;
  for (auto m : mask) count += m;
  CHECK(count == 9);
}

TEST_CASE("decay fit on a synthetic exponential profile") {
  const auto d = GridDomain::box(20.0, 256);
  const double kappa = 1.3;
  PlaneFields f{ScalarField(d), {ScalarField(d)}};
  for (int i = 0; i < d.nx(); ++i)
    for (int j = 0; j < d.ny(); ++j) f.total(i, j) = std::exp(-kappa * std::hypot(d.x(i), d.y(j)));
  const auto fit = decay_fit(f, ModelParams{1.0, 1.0});
  CHECK(fit.slope == doctest::Approx(-2 * kappa).epsilon(1e-3));
  CHECK(fit.r_min == doctest::Approx(10.0));
  CHECK(fit.r_max == doctest::Approx(16.0));
  CHECK(fit.rays == 64);
  CHECK(fit.expected_m == doctest::Approx(2 * std::numbers::sqrt2));
  CHECK(decay_fit(f, ModelParams{0.5, 2.0}).expected_m == doctest::Approx(std::numbers::sqrt2));

  const auto prof = decay_profile(f, 8);
  for (const auto& s : prof) {
    CHECK(s.r >= 10.0 - 1e-12);
    CHECK(s.r <= 16.0 + 1e-12);
    CHECK(s.value == doctest::Approx(std::exp(-2 * kappa * s.r)).epsilon(0.05));
  }
  CHECK_THROWS(decay_profile(f, 8, 0.9, 0.5));

  PlaneFields tiny{ScalarField(d, 0.0), {ScalarField(d, 0.0)}};
  CHECK_THROWS_AS(decay_fit(tiny, ModelParams{}), DecayFitError);
}

TEST_CASE("plane residual and sign checks on the vacuum") {
  const auto d = GridDomain::box(5.0, 32);
  VortexSet none;
  none.species.resize(1);
  const auto bg = plane_background(none, 10.0, d);
  const PlaneState s = plane_boundary_state(bg);
  const auto r = plane_pde_residual(s, bg, ModelParams{}, none);
  CHECK(r.same_operator == 0.0);
  CHECK(r.fourth_order == 0.0);
  for (const auto& c : plane_sign_check(reconstruct(s, bg), none)) CHECK(c.worst == 0.0);
  PlaneFields pos = reconstruct(s, bg);
  pos.total(5, 7) = 1e-6;
  const auto checks = plane_sign_check(pos, none);
  CHECK(checks[0].status == CheckStatus::fail);
  CHECK(checks[0].i == 5);
  CHECK(checks[0].j == 7);
  CHECK(checks[1].status == CheckStatus::pass);
}

TEST_CASE("failed checks") {
  SolveReport r;
  r.converged = true;
  r.quantized = {{"first", 0, -12.5, -4 * pi, 0.005}, {"second", 0, -12.0, -4 * pi, 0.045}};
  r.residual = {1e-9, 1e-3};
  r.max_principle = {{"U", CheckStatus::pass}, {"U+V", CheckStatus::fail, 0.2, 1, 2}};
  ReportThresholds t;
  t.quantized_torus = 0.01;
  r.mode = "torus";
  auto failed = failed_checks(r, t);
  CHECK(failed == std::vector<std::string>{"quantized.second", "max_principle.U+V"});

  r.converged = false;
  r.residual.same_operator = 1e-3;
  failed = failed_checks(r, t);
  CHECK(failed.front() == "convergence");
  CHECK(std::find(failed.begin(), failed.end(), "pde_residual") != failed.end());

  r = SolveReport{};
  r.mode = "plane";
  r.decay = DecayFit{10, 16, -4.07, 2 * std::numbers::sqrt2, 0.44, 64};
  CHECK(failed_checks(r).empty());
  t.decay = 0.15;
  CHECK(failed_checks(r, t) == std::vector<std::string>{"decay"});
}

TEST_CASE("report JSON: fixed key order, determinism, NaN as null") {
  SolveReport r;
  r.mode = "plane";
  r.label = "first";
  r.energy = 1.5;
  r.grad_norm = std::numeric_limits<double>::quiet_NaN();
  r.converged = true;
  r.quantized = {{"total", 0, -12.56, -4 * pi, 0.001}};
  r.iterations = 7;
  r.extra = {{"zeta", 1.0}, {"alpha_like", 2.0}};
  r.notes = {"a note"};
  const std::string a = report_json(r), b = report_json(r);
  CHECK(a == b);
  const auto j = nlohmann::ordered_json::parse(a);
  std::vector<std::string> keys;
  for (auto it = j.begin(); it != j.end(); ++it) keys.push_back(it.key());
  const std::vector<std::string> expect{"mode", "label", "energy", "grad_norm", "converged", "quantized",
                                        "pde_residual_max", "pde_residual_fourth_order", "decay",
                                        "max_principle", "feasibility_margin", "iterations",
                                        "wall_time", "extra", "notes"};
  CHECK(keys == expect);
  CHECK(j["grad_norm"].is_null());
  CHECK(j["decay"].is_null());
  CHECK(j["iterations"] == 7);
  auto ex = j["extra"].begin();
  CHECK(ex.key() == "zeta");

  const auto all = nlohmann::ordered_json::parse(report_json(std::vector<SolveReport>{r, r}));
  CHECK(all["schema_version"] == 1);
  CHECK(all["reports"].size() == 2);
  CHECK(all.begin().key() == "schema_version");
}
