// Serial vs OpenMP timings for the per-step kernels.
#include <benchmark/benchmark.h>

#include <random>

#include "msform/kernels.hpp"
#include "msform/protocols.hpp"
#include "msform/sim.hpp"

namespace {

using namespace msform;

struct Fixture {
  std::vector<Vec> robots;
  std::vector<Vec> samples;
  Matrix p_hat;
  CommGraph graph;

  Fixture(std::size_t n, std::size_t m) {
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> u(0.0, 20.0);
    for (std::size_t i = 0; i < n; ++i) robots.emplace_back(u(rng), u(rng));
    for (std::size_t k = 0; k < m; ++k) samples.emplace_back(u(rng), u(rng));
    kernels::reference_signals(robots, samples, Kernel(1.5), p_hat, Exec::kSerial);
    graph = build_graph(robots, 5.0);
  }
};

Exec exec_of(const benchmark::State& state) {
  return state.range(2) == 0 ? Exec::kSerial : Exec::kParallel;
}

void BM_ReferenceSignals(benchmark::State& state) {
  Fixture f(static_cast<std::size_t>(state.range(0)), static_cast<std::size_t>(state.range(1)));
  Matrix out;
  const Kernel kernel(1.5);
  for (auto _ : state) {
    kernels::reference_signals(f.robots, f.samples, kernel, out, exec_of(state));
    benchmark::DoNotOptimize(out.data().data());
  }
}

void BM_TrueMasses(benchmark::State& state) {
  Fixture f(static_cast<std::size_t>(state.range(0)), static_cast<std::size_t>(state.range(1)));
  const Kernel kernel(1.5);
  for (auto _ : state) {
    auto masses = kernels::true_masses(f.robots, f.samples, kernel, exec_of(state));
    benchmark::DoNotOptimize(masses.values.data());
  }
}

void BM_EstimatorIncrement(benchmark::State& state) {
  Fixture f(static_cast<std::size_t>(state.range(0)), static_cast<std::size_t>(state.range(1)));
  Matrix z(f.p_hat.rows(), f.p_hat.cols());
  for (auto _ : state) {
    kernels::estimator_increment(f.p_hat, f.graph, 20.0, 1e-3, EstimatorScheme::kClippedSign, z,
                                 exec_of(state));
    benchmark::DoNotOptimize(z.data().data());
  }
}

void BM_SimStep(benchmark::State& state) {
  SimConfig config;
  config.n0 = static_cast<std::size_t>(state.range(0));
  config.init_max = Vec{12.0, 12.0};
  config.gamma = 40.0;
  config.estimator_scheme = EstimatorScheme::kClippedSign;
  std::vector<Vec> pts;
  const auto side = static_cast<std::size_t>(state.range(1));
  for (std::size_t y = 0; y < side; ++y) {
    for (std::size_t x = 0; x < side; ++x) pts.emplace_back(0.5 + double(x), 0.5 + double(y));
  }
  const auto shape = SamplePointSet::from_points(2, pts, 1.0);
  SwarmState s = init(config, shape);
  for (auto _ : state) {
    s = step(s, config, shape, exec_of(state));
    benchmark::DoNotOptimize(s.positions.data());
  }
}

}  // namespace

BENCHMARK(BM_ReferenceSignals)->Args({20, 110, 0})->Args({20, 110, 1})->Args({200, 2000, 0})->Args({200, 2000, 1});
BENCHMARK(BM_TrueMasses)->Args({20, 110, 0})->Args({20, 110, 1})->Args({200, 2000, 0})->Args({200, 2000, 1});
BENCHMARK(BM_EstimatorIncrement)->Args({20, 110, 0})->Args({20, 110, 1})->Args({200, 2000, 0})->Args({200, 2000, 1});
BENCHMARK(BM_SimStep)->Args({20, 12, 0})->Args({20, 12, 1})->Args({100, 30, 0})->Args({100, 30, 1});

BENCHMARK_MAIN();
