// Serial reference against the OpenMP kernel for the three hot loops.
// Argument 0 selects the serial path, 1 the parallel one.

#include <cmath>
#include <memory>

#include <benchmark/benchmark.h>

#include "rim/comparison.hpp"
#include "rim/graph.hpp"
#include "rim/graph_transform.hpp"
#include "rim/noise.hpp"

using namespace rim;

namespace {

Execution mode(const benchmark::State& state) {
  return state.range(0) == 0 ? Execution::serial : Execution::parallel;
}

void label(benchmark::State& state) { state.SetLabel(state.range(0) == 0 ? "serial" : "parallel"); }

void BM_OUCache(benchmark::State& state) {
  const WienerPath path = WienerPath::sample(11, -200.0, 20.0, 1.0 / 256.0);
  for (auto _ : state) {
    OUCache cache(path, 40.0, mode(state));
    benchmark::DoNotOptimize(cache.z_values().data());
  }
  label(state);
}

void BM_TransformStep(benchmark::State& state) {
  const System sys{SpectralModel({1.5, -0.5, -1.5, -3.0}, 1),
                   Nonlinearity::saturated(0.25, random_mixing(4, 1))};
  const Fiber fiber(std::make_shared<const OUCache>(WienerPath::sample(3, -60.0, 10.0, 1.0 / 128.0)));
  const double kappa = eigen(1.5, -0.5, 0.25).kappa;
  const auto grid = std::make_shared<const GraphGrid>(1, 161, 1.0);
  const LipschitzGraph gamma = LipschitzGraph::from_function(
      grid, 3, kappa, [&](const Eigen::VectorXd& y) {
        Eigen::VectorXd v(3);
        v << 0.5 * kappa * std::sin(y(0)), 0.2 * kappa * y(0), -0.1 * kappa * std::tanh(y(0));
        return v;
      });
  TransformSettings settings;
  settings.exec = mode(state);
  for (auto _ : state) {
    TransformStep step = transform_step(sys, gamma, fiber, 0.25, settings);
    benchmark::DoNotOptimize(step.output.values().data());
  }
  label(state);
}

void BM_LipNorm(benchmark::State& state) {
  const auto grid = std::make_shared<const GraphGrid>(2, 41, 1.0);
  const LipschitzGraph gamma = LipschitzGraph::from_function(
      grid, 2, 1.0, [](const Eigen::VectorXd& y) {
        Eigen::VectorXd v(2);
        v << std::sin(y(0)) * y(1), 0.3 * y(0) - 0.2 * std::cos(y(1)) + 0.2;
        return v;
      });
  for (auto _ : state) benchmark::DoNotOptimize(lip_norm(gamma, mode(state)));
  label(state);
}

}  // namespace

BENCHMARK(BM_OUCache)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_TransformStep)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_LipNorm)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
