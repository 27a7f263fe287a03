#include <algorithm>
#include <chrono>
#include <random>

#include "cli.hpp"
#include "ndpp/datamatrix.hpp"
#include "ndpp/matfun.hpp"

namespace ndpp::cli {
namespace {

using Clock = std::chrono::steady_clock;

template <class F>
double median_ms(int repeats, F&& f) {
  std::vector<double> t;
  for (int i = 0; i < std::max(repeats, 1); ++i) {
    const auto start = Clock::now();
    f();
    t.push_back(std::chrono::duration<double, std::milli>(Clock::now() - start).count());
  }
  std::nth_element(t.begin(), t.begin() + t.size() / 2, t.end());
  return t[t.size() / 2];
}

Tensor random_tensor(Shape shape, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  Tensor t(std::move(shape));
  for (double& v : t.data()) v = g(rng);
  return t;
}

// Well-conditioned SPD b x b matrix.
Tensor random_spd(std::size_t b, std::uint64_t seed) {
  const Tensor a = random_tensor({4 * b, b}, seed);
  return covariance(a);
}

// Keeps results alive so the timed work is not optimised away.
volatile double g_sink = 0.0;

}  // namespace

std::vector<BenchShape> bench_ladder() {
  return {
      {3, 1, 8, 16, 32, 32},
      {3, 2, 16, 32, 32, 32},
      {3, 1, 16, 32, 32, 32},
      {3, 1, 32, 128, 32, 32},
  };
}

BenchRow bench_layer(const BenchShape& s, std::size_t batch, std::size_t subsample, int repeats) {
  BenchRow row;
  row.shape = s;
  row.subsample = subsample;
  const std::size_t pad = s.kernel / 2;
  const Tensor x = random_tensor({batch, s.ch_in, s.h, s.w}, 1);
  const std::size_t d = s.ch_in * s.kernel * s.kernel;
  const Tensor w = random_tensor({d, s.ch_out}, 2);
  const std::vector<ColumnRange> blocks = partition_columns(d, LayerKind::convolution, s.kernel);

  DataMatrix cov_data;
  row.t_getx = median_ms(repeats, [&] { cov_data = build_conv(x, s.kernel, pad, s.stride, subsample); });
  std::vector<Tensor> covs(blocks.size());
  row.t_cov = median_ms(repeats, [&] {
    for (std::size_t b = 0; b < blocks.size(); ++b)
      covs[b] = covariance(slice_cols(cov_data.values, blocks[b].begin, blocks[b].end));
  });
  std::vector<Tensor> ds(blocks.size());
  row.t_isqrt = median_ms(repeats, [&] {
    for (std::size_t b = 0; b < blocks.size(); ++b) ds[b] = inverse_sqrt_newton(regularize(covs[b], 1e-5)).d;
  });
  row.t_fuse = median_ms(repeats, [&] {
    std::vector<Tensor> parts;
    for (std::size_t b = 0; b < blocks.size(); ++b)
      parts.push_back(matmul(ds[b], slice_rows(w, blocks[b].begin, blocks[b].end)));
    g_sink = vstack(parts)[0];
  });
  row.t_conv = median_ms(repeats, [&] {
    const DataMatrix full = build_conv(x, s.kernel, pad, s.stride, 1);
    g_sink = matmul(full.values, w)[0];
  });
  return row;
}

double time_covariance(std::size_t n, std::size_t b, int repeats) {
  const Tensor x = random_tensor({n, b}, 3);
  return median_ms(repeats, [&] { g_sink = covariance(x)[0]; });
}

double time_isqrt(std::size_t b, int repeats) {
  const Tensor c = random_spd(b, 4);
  return median_ms(repeats, [&] { g_sink = inverse_sqrt_newton(c).d[0]; });
}

}  // namespace ndpp::cli
