#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "vortex/kernels.hpp"

namespace k = vortex::kernels;

namespace {

std::vector<double> noise(std::size_t n, unsigned seed, double amp = 0.3) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd(0.0, amp);
  std::vector<double> v(n);
  for (auto& x : v) x = nd(rng);
  return v;
}

struct Grid {
  explicit Grid(int n)
      : n(n), f(noise(std::size_t(n) * n, 1)), g(noise(std::size_t(n) * n, 2)), u0(noise(std::size_t(n) * n, 3)),
        out(std::size_t(n) * n) {}
  int n;
  std::vector<double> f, g, u0, out;
};

template <bool Serial>
void periodic_laplacian(benchmark::State& st) {
  Grid gr(static_cast<int>(st.range(0)));
  for (auto _ : st) {
    if constexpr (Serial)
      k::serial::periodic_laplacian(gr.f, gr.out, gr.n, gr.n, 0.1, 0.1);
    else
      k::periodic_laplacian(gr.f, gr.out, gr.n, gr.n, 0.1, 0.1);
    benchmark::DoNotOptimize(gr.out.data());
  }
  st.SetItemsProcessed(st.iterations() * gr.f.size());
}

template <bool Serial>
void box_dirichlet(benchmark::State& st) {
  Grid gr(static_cast<int>(st.range(0)));
  for (auto _ : st) {
    const double r = Serial ? k::serial::box_dirichlet(gr.f, gr.g, gr.n, gr.n, 0.1, 0.1)
                            : k::box_dirichlet(gr.f, gr.g, gr.n, gr.n, 0.1, 0.1);
    benchmark::DoNotOptimize(r);
  }
  st.SetItemsProcessed(st.iterations() * gr.f.size());
}

template <bool Serial>
void torus_potential(benchmark::State& st) {
  Grid gr(static_cast<int>(st.range(0)));
  std::vector<double> du(gr.f.size()), dv(gr.f.size());
  const k::TorusNodes in{gr.f.size(), 30.0, 45.0, 1e-3, gr.u0.data(), gr.f.data(), gr.g.data()};
  for (auto _ : st) {
    const auto r = Serial ? k::serial::torus_potential(in, du.data(), dv.data())
                          : k::torus_potential(in, du.data(), dv.data());
    benchmark::DoNotOptimize(r.value);
  }
  st.SetItemsProcessed(st.iterations() * gr.f.size());
}

template <bool Serial>
void plane_potential(benchmark::State& st) {
  Grid gr(static_cast<int>(st.range(0)));
  const auto fi = noise(gr.f.size(), 4), ui0 = noise(gr.f.size(), 5);
  const std::vector<double> w(gr.f.size(), 1e-3);
  std::vector<double> d0(gr.f.size()), d1(gr.f.size());
  k::PlaneNodes in;
  in.nodes = gr.f.size();
  in.species = 1;
  in.alpha = 1.0;
  in.beta = 1.0;
  in.weight = w.data();
  in.ubar = gr.u0.data();
  in.ui0 = {ui0.data()};
  in.f = gr.f.data();
  in.fi = {fi.data()};
  for (auto _ : st) {
    const auto r = Serial ? k::serial::plane_potential(in, d0.data(), {d1.data()})
                          : k::plane_potential(in, d0.data(), {d1.data()});
    benchmark::DoNotOptimize(r.value);
  }
  st.SetItemsProcessed(st.iterations() * gr.f.size());
}

}  // namespace

BENCHMARK(periodic_laplacian<true>)->Name("periodic_laplacian/serial")->Arg(256)->Arg(512);
BENCHMARK(periodic_laplacian<false>)->Name("periodic_laplacian/openmp")->Arg(256)->Arg(512);
BENCHMARK(box_dirichlet<true>)->Name("box_dirichlet/serial")->Arg(256)->Arg(512);
BENCHMARK(box_dirichlet<false>)->Name("box_dirichlet/openmp")->Arg(256)->Arg(512);
BENCHMARK(torus_potential<true>)->Name("torus_potential/serial")->Arg(256)->Arg(512);
BENCHMARK(torus_potential<false>)->Name("torus_potential/openmp")->Arg(256)->Arg(512);
BENCHMARK(plane_potential<true>)->Name("plane_potential/serial")->Arg(256)->Arg(512);
BENCHMARK(plane_potential<false>)->Name("plane_potential/openmp")->Arg(256)->Arg(512);

BENCHMARK_MAIN();
