#include <benchmark/benchmark.h>

#include <random>

#include "ndpp/datamatrix.hpp"
#include "ndpp/datasets.hpp"
#include "ndpp/freqdeconv.hpp"
#include "ndpp/matfun.hpp"
#include "ndpp/ndpp_layer.hpp"

namespace {

using namespace ndpp;

Tensor gaussian(Shape shape, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  Tensor t(std::move(shape));
  for (double& v : t.data()) v = g(rng);
  return t;
}

void BM_Covariance(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0)), b = static_cast<std::size_t>(state.range(1));
  const Tensor x = gaussian({n, b}, 1);
  for (auto _ : state) benchmark::DoNotOptimize(covariance(x));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Covariance)->Args({4096, 64})->Args({8192, 64})->Args({16384, 64})->Args({4096, 128});

void BM_InverseSqrtNewton(benchmark::State& state) {
  const auto b = static_cast<std::size_t>(state.range(0));
  const Tensor c = covariance(gaussian({4 * b, b}, 2));
  for (auto _ : state) benchmark::DoNotOptimize(inverse_sqrt_newton(c, 5));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_InverseSqrtNewton)->RangeMultiplier(2)->Range(16, 256)->Complexity(benchmark::oNCubed);

void BM_InverseSqrtEigen(benchmark::State& state) {
  const auto b = static_cast<std::size_t>(state.range(0));
  const Tensor c = covariance(gaussian({4 * b, b}, 3));
  for (auto _ : state) benchmark::DoNotOptimize(inverse_sqrt_eigen(c));
}
BENCHMARK(BM_InverseSqrtEigen)->RangeMultiplier(2)->Range(16, 64);

void BM_BuildConv(benchmark::State& state) {
  const Tensor x = gaussian({32, 16, 32, 32}, 4);
  const auto subsample = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(build_conv(x, 3, 1, 1, subsample));
}
BENCHMARK(BM_BuildConv)->Arg(1)->Arg(3)->Arg(5);

void BM_NdppConvForwardBackward(benchmark::State& state) {
  NdppLayerConfig c;
  c.layer_kind = LayerKind::convolution;
  c.in_channels = 8;
  c.out_channels = 16;
  c.kernel = 3;
  c.padding = 1;
  c.subsample = static_cast<std::size_t>(state.range(0));
  NdppLayer layer(c);
  const Var x = Var::constant(ar1_batch_2d(16, 8, 16, 0.8, 5));
  for (auto _ : state) {
    layer.fit_whitening(x);
    const Var y = layer.forward(x);
    benchmark::DoNotOptimize(backprop(sum(y)));
  }
}
BENCHMARK(BM_NdppConvForwardBackward)->Arg(1)->Arg(3);

void BM_DeconvKernel(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Tensor img = ar1_field(n, n, 0.9, 6);
  for (auto _ : state) benchmark::DoNotOptimize(deconv_kernel(img));
}
BENCHMARK(BM_DeconvKernel)->Arg(16)->Arg(32)->Arg(64);

}  // namespace
BENCHMARK_MAIN();
