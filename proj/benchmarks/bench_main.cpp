#include "toricflow/flow.hpp"
#include "toricflow/geometry.hpp"
#include "toricflow/polytope.hpp"
#include "toricflow/stability.hpp"

#include <benchmark/benchmark.h>

using namespace toricflow;

namespace {

std::shared_ptr<const DelzantPolytope> simplex(int n) {
  std::vector<Facet> facets;
  for (int i = 0; i < n; ++i) {
    Facet f;
    f.normal.assign(n, 0);
    f.normal[i] = 1;
    facets.push_back(f);
  }
  Facet top;
  top.normal.assign(n, -1);
  top.offset = 1;
  facets.push_back(top);
  return std::make_shared<const DelzantPolytope>(DelzantPolytope::create(n, facets, "simplex"));
}

void abreu_operator(benchmark::State& state) {
  auto chart = make_grid(simplex(2), 1.0 / static_cast<double>(state.range(0)));
  auto u = perturbed(chart, [](std::span<const double> x) { return 0.05 * x[0] * x[0] * x[1]; });
  for (auto _ : state) benchmark::DoNotOptimize(abreu_scalar_curvature(u));
  state.counters["nodes"] = static_cast<double>(chart->size());
}
BENCHMARK(abreu_operator)->Arg(16)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

void implicit_step(benchmark::State& state) {
  auto P = simplex(2);
  auto chart = make_grid(P, 1.0 / static_cast<double>(state.range(0)));
  auto s = make_state(perturbed(chart, [](std::span<const double> x) { return 0.05 * x[0] * x[0] * x[1]; }),
                      extremal_affine(*P));
  for (auto _ : state) benchmark::DoNotOptimize(step_implicit(s, 1e-4));
}
BENCHMARK(implicit_step)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);

void exact_moments(benchmark::State& state) {
  auto P = simplex(static_cast<int>(state.range(0)));
  Exponent alpha(P->dim(), 2);
  for (auto _ : state) benchmark::DoNotOptimize(moments(*P, alpha));
}
BENCHMARK(exact_moments)->Arg(2)->Arg(3);

void stability_scan(benchmark::State& state) {
  auto P = simplex(2);
  const auto theta = extremal_affine(*P);
  for (auto _ : state) benchmark::DoNotOptimize(pl_stability_scan(*P, theta, static_cast<int>(state.range(0))));
}
BENCHMARK(stability_scan)->Arg(2)->Arg(3)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
