#include "vortex/background.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "vortex/fourier.hpp"
#include "vortex/kernels.hpp"

namespace vortex {

int VortexSet::count(int i) const {
  int n = 0;
  for (const auto& p : species.at(i)) n += p.multiplicity;
  return n;
}

int VortexSet::total() const {
  int n = 0;
  for (int i = 0; i < species_count(); ++i) n += count(i);
  return n;
}

namespace {

void check_points(const VortexSet& vs, const GridDomain& d) {
  for (const auto& sp : vs.species)
    for (const auto& p : sp) {
      if (p.multiplicity < 1) throw std::invalid_argument("vortex multiplicity must be at least 1");
      const bool inside = d.is_box()
                              ? std::abs(p.x) < d.ext1 && std::abs(p.y) < d.ext2
                              : p.x >= 0.0 && p.x < d.ext1 && p.y >= 0.0 && p.y < d.ext2;
      if (!inside || !std::isfinite(p.x) || !std::isfinite(p.y))
        throw std::invalid_argument("vortex point lies outside the domain");
    }
}

std::pair<int, int> nearest(const VortexPoint& p, const GridDomain& d) {
  int i = static_cast<int>(std::lround((p.x - d.x(0)) / d.hx()));
  int j = static_cast<int>(std::lround((p.y - d.y(0)) / d.hy()));
  if (d.is_torus()) {
    i %= d.nx();
    j %= d.ny();
  }
  return {i, j};
}

}  // namespace

std::vector<std::pair<int, int>> vortex_nodes(const VortexSet& vs, const GridDomain& d) {
  std::vector<std::pair<int, int>> out;
  for (const auto& sp : vs.species)
    for (const auto& p : sp) out.push_back(nearest(p, d));
  return out;
}

BackgroundPlane plane_background(const VortexSet& vs, double lambda, const GridDomain& d) {
  if (!(lambda > 0.0)) throw std::invalid_argument("background lambda must be positive");
  if (!d.is_box()) throw DomainError("plane background needs a box domain");
  check_points(vs, d);
  BackgroundPlane bg;
  bg.lambda = lambda;
  bg.u0_sum = ScalarField(d);
  bg.h_sum = ScalarField(d);
  // vortex-on-node floor: half the cell diagonal
  const double floor_r2 = 0.25 * (d.hx() * d.hx() + d.hy() * d.hy());
  for (const auto& sp : vs.species) {
    ScalarField u(d), h(d);
    for (int i = 0; i < d.nx(); ++i)
      for (int j = 0; j < d.ny(); ++j) {
        double su = 0.0, sh = 0.0;
        for (const auto& p : sp) {
          const double dx = d.x(i) - p.x, dy = d.y(j) - p.y;
          const double r2 = dx * dx + dy * dy;
          su -= p.multiplicity * std::log1p(lambda / std::max(r2, floor_r2));
          sh += p.multiplicity * 4.0 * lambda / ((lambda + r2) * (lambda + r2));
        }
        u(i, j) = su;
        h(i, j) = sh;
      }
    bg.u0_sum += u;
    bg.h_sum += h;
    bg.u0.push_back(std::move(u));
    bg.h.push_back(std::move(h));
  }

  bg.far_radius = 0.25 * d.ext1;
  const double r2far = bg.far_radius * bg.far_radius;
  std::vector<unsigned char> far(d.size(), 0);
  for (int i = 0; i < d.nx(); ++i)
    for (int j = 0; j < d.ny(); ++j) {
      if (d.on_boundary(i, j)) continue;
      bool is_far = true;
      for (const auto& sp : vs.species)
        for (const auto& p : sp) {
          const double dx = d.x(i) - p.x, dy = d.y(j) - p.y;
          if (dx * dx + dy * dy < r2far) is_far = false;
        }
      far[d.index(i, j)] = is_far;
    }
  bg.source_sum = ScalarField(d);
  for (std::size_t s = 0; s < bg.u0.size(); ++s) {
    ScalarField src = bg.h[s];
    ScalarField lap(d);
    kernels::box_laplacian(bg.u0[s].span(), lap.span(), d.nx(), d.ny(), d.hx(), d.hy());
    for (std::size_t k = 0; k < d.size(); ++k)
      if (far[k]) src[k] = -lap[k];
    bg.source_sum += src;
    bg.source.push_back(std::move(src));
  }
  return bg;
}

BackgroundTorus torus_background(const VortexSet& vs, const GridDomain& d) {
  if (!d.is_torus()) throw DomainError("torus background needs a torus domain");
  if (vs.species_count() > 1) throw std::invalid_argument("torus system is single-species");
  check_points(vs, d);
  BackgroundTorus bg;
  bg.n = vs.total();
  bg.u0 = ScalarField(d);
  if (bg.n == 0) return bg;
  ScalarField rhs(d, -8.0 * std::numbers::pi * bg.n / d.area());
  const double load = 8.0 * std::numbers::pi / d.cell_area();
  for (const auto& p : vs.species[0]) {
    const auto [i, j] = nearest(p, d);
    rhs(i, j) += load * p.multiplicity;
  }
  periodic_fourier(d).solve_poisson(rhs.span(), bg.u0.span());
  return bg;
}

}  // namespace vortex
