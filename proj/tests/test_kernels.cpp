#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "vortex/kernels.hpp"

namespace k = vortex::kernels;

namespace {

std::vector<double> noise(std::size_t n, std::mt19937_64& rng, double amp = 1.0) {
  std::normal_distribution<double> nd(0.0, amp);
  std::vector<double> v(n);
  for (auto& x : v) x = nd(rng);
  return v;
}

double max_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace

TEST_CASE("serial and parallel stencils agree") {
  std::mt19937_64 rng(1);
  const int nx = 37, ny = 29;
  const auto f = noise(nx * ny, rng), g = noise(nx * ny, rng);
  std::vector<double> a(f.size()), b(f.size());

  k::box_laplacian(f, a, nx, ny, 0.3, 0.2);
  k::serial::box_laplacian(f, b, nx, ny, 0.3, 0.2);
  CHECK(max_diff(a, b) == 0.0);

  k::periodic_laplacian(f, a, nx, ny, 0.3, 0.2);
  k::serial::periodic_laplacian(f, b, nx, ny, 0.3, 0.2);
  CHECK(max_diff(a, b) == 0.0);

  CHECK(k::box_dirichlet(f, g, nx, ny, 0.3, 0.2) ==
        doctest::Approx(k::serial::box_dirichlet(f, g, nx, ny, 0.3, 0.2)).epsilon(1e-12));
  CHECK(k::periodic_dirichlet(f, g, nx, ny, 0.3, 0.2) ==
        doctest::Approx(k::serial::periodic_dirichlet(f, g, nx, ny, 0.3, 0.2)).epsilon(1e-12));
  CHECK(k::weighted_dot(g, f, f) == doctest::Approx(k::serial::weighted_dot(g, f, f)).epsilon(1e-12));
  CHECK(k::sum(f) == doctest::Approx(k::serial::sum(f)).epsilon(1e-12));
}

TEST_CASE("torus potential: value, pointwise derivative and delta") {
  std::mt19937_64 rng(2);
  const std::size_t n = 500;
  const auto u0 = noise(n, rng, 0.5), u = noise(n, rng, 0.5), v = noise(n, rng, 0.5);
  const auto du = noise(n, rng), dv = noise(n, rng);
  const double alpha = 1.3, beta = 2.1, w = 0.01;
  const k::TorusNodes in{n, alpha, beta, w, u0.data(), u.data(), v.data()};

  std::vector<double> gu(n), gv(n), su(n), sv(n);
  const auto par = k::torus_potential(in, gu.data(), gv.data());
  const auto ser = k::serial::torus_potential(in, su.data(), sv.data());
  CHECK(par.value == doctest::Approx(ser.value).epsilon(1e-12));
  CHECK(max_diff(gu, su) == 0.0);
  CHECK(max_diff(gv, sv) == 0.0);
  CHECK_FALSE(par.clamped);

  double direct = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double a = std::exp(u0[i] + u[i]), b = std::exp(v[i]);
    direct += alpha * (a + b - 2) * (a + b - 2) + beta * (a - b) * (a - b);
  }
  CHECK(par.value == doctest::Approx(direct * w).epsilon(1e-12));

  // pointwise derivative by central differences at one node
  const std::size_t i = 17;
  auto density = [&](double uu, double vv) {
    const double a = std::exp(u0[i] + uu), b = std::exp(vv);
    return alpha * (a + b - 2) * (a + b - 2) + beta * (a - b) * (a - b);
  };
  const double e = 1e-6;
  CHECK(gu[i] == doctest::Approx((density(u[i] + e, v[i]) - density(u[i] - e, v[i])) / (2 * e)).epsilon(1e-7));
  CHECK(gv[i] == doctest::Approx((density(u[i], v[i] + e) - density(u[i], v[i] - e)) / (2 * e)).epsilon(1e-7));

  const double t = 0.3;
  std::vector<double> u2(n), v2(n);
  for (std::size_t j = 0; j < n; ++j) {
    u2[j] = u[j] + t * du[j];
    v2[j] = v[j] + t * dv[j];
  }
  const k::TorusNodes in2{n, alpha, beta, w, u0.data(), u2.data(), v2.data()};
  const double diff = k::torus_potential(in2, nullptr, nullptr).value - par.value;
  CHECK(k::torus_potential_delta(in, du.data(), dv.data(), t).value == doctest::Approx(diff).epsilon(1e-10));
  CHECK(k::serial::torus_potential_delta(in, du.data(), dv.data(), t).value ==
        doctest::Approx(diff).epsilon(1e-10));
}

TEST_CASE("plane potential: serial and parallel agree, delta matches differences") {
  std::mt19937_64 rng(3);
  const std::size_t n = 400;
  const int m = 2;
  const auto w = noise(n, rng), ubar = noise(n, rng, 0.3);
  const auto u1 = noise(n, rng, 0.3), u2 = noise(n, rng, 0.3);
  const auto f = noise(n, rng, 0.3), f1 = noise(n, rng, 0.3), f2 = noise(n, rng, 0.3);
  const auto df = noise(n, rng), df1 = noise(n, rng), df2 = noise(n, rng);
  k::PlaneNodes in;
  in.nodes = n;
  in.species = m;
  in.alpha = 0.7;
  in.beta = 1.9;
  in.weight = w.data();
  in.ubar = ubar.data();
  in.ui0 = {u1.data(), u2.data()};
  in.f = f.data();
  in.fi = {f1.data(), f2.data()};

  std::vector<double> g0(n), g1(n), g2(n), s0(n), s1(n), s2(n);
  const auto par = k::plane_potential(in, g0.data(), {g1.data(), g2.data()});
  const auto ser = k::serial::plane_potential(in, s0.data(), {s1.data(), s2.data()});
  CHECK(par.value == doctest::Approx(ser.value).epsilon(1e-12));
  CHECK(max_diff(g0, s0) == 0.0);
  CHECK(max_diff(g1, s1) == 0.0);
  CHECK(max_diff(g2, s2) == 0.0);

  // direct density: (alpha/M) S^2 + beta sum (A_i - B_i)^2
  double direct = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double base = ubar[i] + f[i];
    const double ui[2] = {u1[i] + f1[i], u2[i] + f2[i]};
    double s = 0.0, dd = 0.0;
    for (double x : ui) {
      const double a = std::exp(base + x), b = std::exp(base - x);
      s += a + b - 2;
      dd += (a - b) * (a - b);
    }
    direct += w[i] * (in.alpha / m * s * s + in.beta * dd);
  }
  CHECK(par.value == doctest::Approx(direct).epsilon(1e-12));

  const double t = -0.2;
  std::vector<double> fa(n), fa1(n), fa2(n);
  for (std::size_t i = 0; i < n; ++i) {
    fa[i] = f[i] + t * df[i];
    fa1[i] = f1[i] + t * df1[i];
    fa2[i] = f2[i] + t * df2[i];
  }
  k::PlaneNodes moved = in;
  moved.f = fa.data();
  moved.fi = {fa1.data(), fa2.data()};
  const double diff = k::plane_potential(moved, nullptr, {}).value - par.value;
  CHECK(k::plane_potential_delta(in, df.data(), {df1.data(), df2.data()}, t).value ==
        doctest::Approx(diff).epsilon(1e-10));
  CHECK(k::serial::plane_potential_delta(in, df.data(), {df1.data(), df2.data()}, t).value ==
        doctest::Approx(diff).epsilon(1e-10));
}

TEST_CASE("exponent clamp is reported") {
  std::vector<double> u0{0.0}, u{80.0}, v{0.0};
  const k::TorusNodes in{1, 1.0, 2.0, 1.0, u0.data(), u.data(), v.data()};
  const auto r = k::torus_potential(in, nullptr, nullptr);
  CHECK(r.clamped);
  CHECK(std::isfinite(r.value));
}
