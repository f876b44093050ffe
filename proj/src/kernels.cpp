#include "vortex/kernels.hpp"

#include <algorithm>
#include <cmath>

namespace vortex::kernels {

namespace {

inline double clamp_exp(double e, bool& clamped) {
  if (e > kExpClamp) {
    clamped = true;
    return kExpClamp;
  }
  if (e < -kExpClamp) {
    clamped = true;
    return -kExpClamp;
  }
  return e;
}

inline double at(std::span<const double> f, int i, int j, int nx, int ny) {
  if (i < 0 || j < 0 || i >= nx || j >= ny) return 0.0;
  return f[static_cast<std::size_t>(i) * ny + j];
}

inline double box_lap_node(std::span<const double> f, int i, int j, int nx, int ny, double ix2,
                           double iy2) {
  const double c = f[static_cast<std::size_t>(i) * ny + j];
  return (at(f, i - 1, j, nx, ny) - 2.0 * c + at(f, i + 1, j, nx, ny)) * ix2 +
         (at(f, i, j - 1, nx, ny) - 2.0 * c + at(f, i, j + 1, nx, ny)) * iy2;
}

inline double per_lap_node(std::span<const double> f, int i, int j, int nx, int ny, double ix2,
                           double iy2) {
  const int im = i == 0 ? nx - 1 : i - 1, ip = i == nx - 1 ? 0 : i + 1;
  const int jm = j == 0 ? ny - 1 : j - 1, jp = j == ny - 1 ? 0 : j + 1;
  const std::size_t r = static_cast<std::size_t>(i) * ny;
  const double c = f[r + j];
  return (f[static_cast<std::size_t>(im) * ny + j] - 2.0 * c + f[static_cast<std::size_t>(ip) * ny + j]) * ix2 +
         (f[r + jm] - 2.0 * c + f[r + jp]) * iy2;
}

// edges to the right and up of node (i, j), including edges into the zero ghost layer;
// row i = -1 and column j = -1 are handled by the caller
inline double box_edge_node(std::span<const double> f, std::span<const double> g, int i, int j,
                            int nx, int ny, double wx, double wy) {
  const double fc = at(f, i, j, nx, ny), gc = at(g, i, j, nx, ny);
  const double ex = (at(f, i + 1, j, nx, ny) - fc) * (at(g, i + 1, j, nx, ny) - gc);
  const double ey = (at(f, i, j + 1, nx, ny) - fc) * (at(g, i, j + 1, nx, ny) - gc);
  return ex * wx + ey * wy;
}

inline double per_edge_node(std::span<const double> f, std::span<const double> g, int i, int j,
                            int nx, int ny, double wx, double wy) {
  const int ip = i == nx - 1 ? 0 : i + 1, jp = j == ny - 1 ? 0 : j + 1;
  const std::size_t r = static_cast<std::size_t>(i) * ny;
  const std::size_t rp = static_cast<std::size_t>(ip) * ny;
  const double ex = (f[rp + j] - f[r + j]) * (g[rp + j] - g[r + j]);
  const double ey = (f[r + jp] - f[r + j]) * (g[r + jp] - g[r + j]);
  return ex * wx + ey * wy;
}

// Plane node: potential density (alpha/M) S^2 + beta sum (A_i - B_i)^2 with
// S = sum (A_i + B_i - 2). am1/bm1 are scratch of length M.
inline double plane_node(const PlaneNodes& in, std::size_t k, double* am1, double* bm1,
                         bool& clamped) {
  double s = 0.0, d2 = 0.0;
  const double base = in.ubar[k] + in.f[k];
  for (int i = 0; i < in.species; ++i) {
    const double ui = in.ui0[i][k] + in.fi[i][k];
    am1[i] = std::expm1(clamp_exp(base + ui, clamped));
    bm1[i] = std::expm1(clamp_exp(base - ui, clamped));
    s += am1[i] + bm1[i];
    const double d = am1[i] - bm1[i];
    d2 += d * d;
  }
  return in.alpha / in.species * s * s + in.beta * d2;
}

inline void plane_node_grad(const PlaneNodes& in, std::size_t k, const double* am1,
                            const double* bm1, double* dfo, const std::vector<double*>& dfio) {
  double s = 0.0, t = 0.0, d2 = 0.0;
  for (int i = 0; i < in.species; ++i) {
    s += am1[i] + bm1[i];
    t += 2.0 + am1[i] + bm1[i];
    const double d = am1[i] - bm1[i];
    d2 += d * d;
  }
  const double c = 2.0 * in.alpha / in.species * s;
  if (dfo) dfo[k] = c * t + 2.0 * in.beta * d2;
  for (int i = 0; i < in.species; ++i) {
    if (!dfio.empty() && dfio[i]) {
      const double d = am1[i] - bm1[i];
      dfio[i][k] = c * d + 2.0 * in.beta * d * (2.0 + am1[i] + bm1[i]);
    }
  }
}

inline double plane_node_delta(const PlaneNodes& in, std::size_t k, const double* df,
                               const std::vector<const double*>& dfi, double t, bool& clamped) {
  double s = 0.0, ds = 0.0, acc = 0.0;
  const double base = in.ubar[k] + in.f[k];
  for (int i = 0; i < in.species; ++i) {
    const double ui = in.ui0[i][k] + in.fi[i][k];
    const double ea = clamp_exp(base + ui, clamped);
    const double eb = clamp_exp(base - ui, clamped);
    const double ea2 = clamp_exp(base + ui + t * (df[k] + dfi[i][k]), clamped);
    const double eb2 = clamp_exp(base - ui + t * (df[k] - dfi[i][k]), clamped);
    const double am1 = std::expm1(ea), bm1 = std::expm1(eb);
    const double da = std::exp(ea) * std::expm1(ea2 - ea);
    const double db = std::exp(eb) * std::expm1(eb2 - eb);
    s += am1 + bm1;
    ds += da + db;
    const double dd = da - db;
    acc += in.beta * dd * (2.0 * (am1 - bm1) + dd);
  }
  return acc + in.alpha / in.species * ds * (2.0 * s + ds);
}

struct TorusNode {
  double density, gu, gv;
};

inline TorusNode torus_node(const TorusNodes& in, std::size_t k, bool& clamped) {
  const double am1 = std::expm1(clamp_exp(in.u0[k] + in.u[k], clamped));
  const double bm1 = std::expm1(clamp_exp(in.v[k], clamped));
  const double s = am1 + bm1, d = am1 - bm1;
  return {in.alpha * s * s + in.beta * d * d, 2.0 * (1.0 + am1) * (in.alpha * s + in.beta * d),
          2.0 * (1.0 + bm1) * (in.alpha * s - in.beta * d)};
}

inline double torus_node_delta(const TorusNodes& in, std::size_t k, const double* du,
                               const double* dv, double t, bool& clamped) {
  const double ea = clamp_exp(in.u0[k] + in.u[k], clamped);
  const double eb = clamp_exp(in.v[k], clamped);
  const double ea2 = clamp_exp(in.u0[k] + in.u[k] + t * du[k], clamped);
  const double eb2 = clamp_exp(in.v[k] + t * dv[k], clamped);
  const double am1 = std::expm1(ea), bm1 = std::expm1(eb);
  const double da = std::exp(ea) * std::expm1(ea2 - ea);
  const double db = std::exp(eb) * std::expm1(eb2 - eb);
  const double ds = da + db, dd = da - db;
  return in.alpha * ds * (2.0 * (am1 + bm1) + ds) + in.beta * dd * (2.0 * (am1 - bm1) + dd);
}

}  // namespace

// ---- OpenMP versions ----

void box_laplacian(std::span<const double> f, std::span<double> out, int nx, int ny, double hx,
                   double hy) {
  const double ix2 = 1.0 / (hx * hx), iy2 = 1.0 / (hy * hy);
#pragma omp parallel for schedule(static)
  for (int i = 0; i < nx; ++i)
    for (int j = 0; j < ny; ++j)
      out[static_cast<std::size_t>(i) * ny + j] = box_lap_node(f, i, j, nx, ny, ix2, iy2);
}

void periodic_laplacian(std::span<const double> f, std::span<double> out, int nx, int ny,
                        double hx, double hy) {
  const double ix2 = 1.0 / (hx * hx), iy2 = 1.0 / (hy * hy);
#pragma omp parallel for schedule(static)
  for (int i = 0; i < nx; ++i)
    for (int j = 0; j < ny; ++j)
      out[static_cast<std::size_t>(i) * ny + j] = per_lap_node(f, i, j, nx, ny, ix2, iy2);
}

double box_dirichlet(std::span<const double> f, std::span<const double> g, int nx, int ny,
                     double hx, double hy) {
  const double wx = hy / hx, wy = hx / hy;
  double acc = 0.0;
#pragma omp parallel for schedule(static) reduction(+ : acc)
  for (int i = -1; i < nx; ++i)
    for (int j = -1; j < ny; ++j) acc += box_edge_node(f, g, i, j, nx, ny, wx, wy);
  return acc;
}

double periodic_dirichlet(std::span<const double> f, std::span<const double> g, int nx, int ny,
                          double hx, double hy) {
  const double wx = hy / hx, wy = hx / hy;
  double acc = 0.0;
#pragma omp parallel for schedule(static) reduction(+ : acc)
  for (int i = 0; i < nx; ++i)
    for (int j = 0; j < ny; ++j) acc += per_edge_node(f, g, i, j, nx, ny, wx, wy);
  return acc;
}

double weighted_dot(std::span<const double> w, std::span<const double> f,
                    std::span<const double> g) {
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(f.size());
  double acc = 0.0;
#pragma omp parallel for schedule(static) reduction(+ : acc)
  for (std::ptrdiff_t k = 0; k < n; ++k) acc += w[k] * f[k] * g[k];
  return acc;
}

double sum(std::span<const double> f) {
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(f.size());
  double acc = 0.0;
#pragma omp parallel for schedule(static) reduction(+ : acc)
  for (std::ptrdiff_t k = 0; k < n; ++k) acc += f[k];
  return acc;
}

PotentialSum plane_potential(const PlaneNodes& in, double* dfo, const std::vector<double*>& dfio) {
  double acc = 0.0;
  bool clamped = false;
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(in.nodes);
#pragma omp parallel reduction(+ : acc) reduction(|| : clamped)
  {
    std::vector<double> am1(in.species), bm1(in.species);
#pragma omp for schedule(static)
    for (std::ptrdiff_t k = 0; k < n; ++k) {
      acc += in.weight[k] * plane_node(in, k, am1.data(), bm1.data(), clamped);
      if (dfo || !dfio.empty()) plane_node_grad(in, k, am1.data(), bm1.data(), dfo, dfio);
    }
  }
  return {acc, clamped};
}

PotentialSum plane_potential_delta(const PlaneNodes& in, const double* df,
                                   const std::vector<const double*>& dfi, double t) {
  double acc = 0.0;
  bool clamped = false;
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(in.nodes);
#pragma omp parallel for schedule(static) reduction(+ : acc) reduction(|| : clamped)
  for (std::ptrdiff_t k = 0; k < n; ++k)
    acc += in.weight[k] * plane_node_delta(in, k, df, dfi, t, clamped);
  return {acc, clamped};
}

PotentialSum torus_potential(const TorusNodes& in, double* du, double* dv) {
  double acc = 0.0;
  bool clamped = false;
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(in.nodes);
#pragma omp parallel for schedule(static) reduction(+ : acc) reduction(|| : clamped)
  for (std::ptrdiff_t k = 0; k < n; ++k) {
    const TorusNode r = torus_node(in, k, clamped);
    acc += r.density;
    if (du) du[k] = r.gu;
    if (dv) dv[k] = r.gv;
  }
  return {acc * in.weight, clamped};
}

PotentialSum torus_potential_delta(const TorusNodes& in, const double* du, const double* dv,
                                   double t) {
  double acc = 0.0;
  bool clamped = false;
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(in.nodes);
#pragma omp parallel for schedule(static) reduction(+ : acc) reduction(|| : clamped)
  for (std::ptrdiff_t k = 0; k < n; ++k) acc += torus_node_delta(in, k, du, dv, t, clamped);
  return {acc * in.weight, clamped};
}

// ---- serial reference versions ----

namespace serial {

void box_laplacian(std::span<const double> f, std::span<double> out, int nx, int ny, double hx,
                   double hy) {
  const double ix2 = 1.0 / (hx * hx), iy2 = 1.0 / (hy * hy);
  for (int i = 0; i < nx; ++i)
    for (int j = 0; j < ny; ++j)
      out[static_cast<std::size_t>(i) * ny + j] = box_lap_node(f, i, j, nx, ny, ix2, iy2);
}

void periodic_laplacian(std::span<const double> f, std::span<double> out, int nx, int ny,
                        double hx, double hy) {
  const double ix2 = 1.0 / (hx * hx), iy2 = 1.0 / (hy * hy);
  for (int i = 0; i < nx; ++i)
    for (int j = 0; j < ny; ++j)
      out[static_cast<std::size_t>(i) * ny + j] = per_lap_node(f, i, j, nx, ny, ix2, iy2);
}

double box_dirichlet(std::span<const double> f, std::span<const double> g, int nx, int ny,
                     double hx, double hy) {
  const double wx = hy / hx, wy = hx / hy;
  double acc = 0.0;
  for (int i = -1; i < nx; ++i)
    for (int j = -1; j < ny; ++j) acc += box_edge_node(f, g, i, j, nx, ny, wx, wy);
  return acc;
}

double periodic_dirichlet(std::span<const double> f, std::span<const double> g, int nx, int ny,
                          double hx, double hy) {
  const double wx = hy / hx, wy = hx / hy;
  double acc = 0.0;
  for (int i = 0; i < nx; ++i)
    for (int j = 0; j < ny; ++j) acc += per_edge_node(f, g, i, j, nx, ny, wx, wy);
  return acc;
}

double weighted_dot(std::span<const double> w, std::span<const double> f,
                    std::span<const double> g) {
  double acc = 0.0;
  for (std::size_t k = 0; k < f.size(); ++k) acc += w[k] * f[k] * g[k];
  return acc;
}

double sum(std::span<const double> f) {
  double acc = 0.0;
  for (double x : f) acc += x;
  return acc;
}

PotentialSum plane_potential(const PlaneNodes& in, double* dfo, const std::vector<double*>& dfio) {
  PotentialSum r;
  std::vector<double> am1(in.species), bm1(in.species);
  for (std::size_t k = 0; k < in.nodes; ++k) {
    r.value += in.weight[k] * plane_node(in, k, am1.data(), bm1.data(), r.clamped);
    if (dfo || !dfio.empty()) plane_node_grad(in, k, am1.data(), bm1.data(), dfo, dfio);
  }
  return r;
}

PotentialSum plane_potential_delta(const PlaneNodes& in, const double* df,
                                   const std::vector<const double*>& dfi, double t) {
  PotentialSum r;
  for (std::size_t k = 0; k < in.nodes; ++k)
    r.value += in.weight[k] * plane_node_delta(in, k, df, dfi, t, r.clamped);
  return r;
}

PotentialSum torus_potential(const TorusNodes& in, double* du, double* dv) {
  PotentialSum r;
  for (std::size_t k = 0; k < in.nodes; ++k) {
    const TorusNode n = torus_node(in, k, r.clamped);
    r.value += n.density;
    if (du) du[k] = n.gu;
    if (dv) dv[k] = n.gv;
  }
  r.value *= in.weight;
  return r;
}

PotentialSum torus_potential_delta(const TorusNodes& in, const double* du, const double* dv,
                                   double t) {
  PotentialSum r;
  for (std::size_t k = 0; k < in.nodes; ++k) r.value += torus_node_delta(in, k, du, dv, t, r.clamped);
  r.value *= in.weight;
  return r;
}

}  // namespace serial

}  // namespace vortex::kernels
