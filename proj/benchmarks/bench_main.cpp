#include <cmath>
#include <cstddef>
#include <vector>

#include <benchmark/benchmark.h>

#include "hopflax/hopf_lax.hpp"
#include "hopflax/inequalities.hpp"
#include "hopflax/space_gen.hpp"
#include "hopflax/transport.hpp"

namespace {

hopflax::ScalarField cosine(const hopflax::MeasuredSpace& space) {
  std::vector<double> v(space.size());
  const double two_pi = 2.0 * std::acos(-1.0);
  for (std::size_t i = 0; i < v.size(); ++i) {
    v[i] = std::cos(two_pi * static_cast<double>(i) / static_cast<double>(v.size()));
  }
  return hopflax::make_field(space, std::move(v));
}

void BM_apply(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto space = hopflax::generate(hopflax::SpaceSpec::circle(n, 1.0));
  const auto f = cosine(space);
  for (auto _ : state) benchmark::DoNotOptimize(hopflax::apply(space, f, 0.01));
}

void BM_apply_pruned(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto space = hopflax::generate(hopflax::SpaceSpec::circle(n, 1.0));
  const auto f = cosine(space);
  for (auto _ : state) benchmark::DoNotOptimize(hopflax::apply_pruned(space, f, 0.01));
}

void BM_w2_gaussian(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto space = hopflax::generate(hopflax::SpaceSpec::gaussian_interval(n, 1.0, 4.0));
  const auto nu = space.measure();
  std::vector<double> tilted(n);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    tilted[i] = nu[i] * std::exp(0.5 * (static_cast<double>(i) / static_cast<double>(n - 1) - 0.5));
    total += tilted[i];
  }
  for (double& m : tilted) m /= total;
  for (auto _ : state) benchmark::DoNotOptimize(hopflax::w2(space, tilted, nu));
}

void BM_estimate_lsi(benchmark::State& state) {
  const auto space = hopflax::generate(hopflax::SpaceSpec::gaussian_interval(101, 1.0, 4.0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(hopflax::estimate_constant(space, hopflax::Inequality::lsi,
                                                        hopflax::WitnessFamily{}, 200, 7));
  }
}

}  // namespace

BENCHMARK(BM_apply)->Arg(256)->Arg(512);
BENCHMARK(BM_apply_pruned)->Arg(256)->Arg(512);
BENCHMARK(BM_w2_gaussian)->Arg(51)->Arg(101);
BENCHMARK(BM_estimate_lsi)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
