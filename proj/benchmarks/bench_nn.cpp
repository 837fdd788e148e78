#include <benchmark/benchmark.h>

#include <random>

#include "fingen/nn/network.hpp"
#include "fingen/surrogate/model.hpp"

using namespace fingen::nn;

namespace {

Tensor random_input(std::vector<int> shape, std::mt19937_64& rng) {
  Tensor t(std::move(shape));
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (auto& x : t.data) x = u(rng);
  return t;
}

void forward_backward(benchmark::State& state, const NetworkSpec& spec, int batch) {
  std::mt19937_64 rng(7);
  const Network net(spec);
  const auto params = net.initial_parameters(rng);
  std::vector<int> shape{batch};
  shape.insert(shape.end(), spec.input_shape.begin(), spec.input_shape.end());
  const Tensor input = random_input(shape, rng);
  std::vector<double> grads(params.size());
  for (auto _ : state) {
    ForwardRecord record;
    const Tensor out = net.forward(params, input, &record);
    Tensor upstream(out.shape, 1.0);
    benchmark::DoNotOptimize(net.backward(params, record, upstream, grads));
  }
}

}  // namespace

static void BM_MlpForwardBackward(benchmark::State& state) {
  forward_backward(state, NetworkSpec::mlp(48, {512, 512, 512}, 2), static_cast<int>(state.range(0)));
}
BENCHMARK(BM_MlpForwardBackward)->Arg(1)->Arg(50)->Unit(benchmark::kMicrosecond);

static void BM_CnnForwardBackward(benchmark::State& state) {
  const auto spec = fingen::surrogate::default_surrogate_spec(64);
  forward_backward(state, spec, static_cast<int>(state.range(0)));
}
BENCHMARK(BM_CnnForwardBackward)->Arg(1)->Arg(32)->Unit(benchmark::kMillisecond);
