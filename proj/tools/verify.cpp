#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "cli.hpp"
#include "ndpp/datasets.hpp"
#include "ndpp/freqdeconv.hpp"
#include "ndpp/gradcheck.hpp"
#include "ndpp/ndpp_layer.hpp"
#include "ndpp/optim.hpp"
#include "ndpp/syncsim.hpp"
#include "ndpp/toy.hpp"

namespace ndpp::cli {
namespace {

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(3);
  s << std::scientific << v;
  return s.str();
}

NdppLayerConfig conv_config(LayerKind kind, std::size_t c_in, std::size_t c_out, std::size_t dims) {
  NdppLayerConfig c;
  c.layer_kind = kind;
  c.in_channels = c_in;
  c.out_channels = c_out;
  c.kernel = 3;
  c.padding = 1;
  c.spatial_dims = dims;
  return c;
}

double whitening_error(NdppLayer& layer, const Var& x) {
  layer.fit_whitening(x);
  const Tensor z = layer.whitened_data_matrix(x).value();
  double worst = 0.0;
  for (const ColumnRange& b : layer.state().blocks) {
    const Tensor c = covariance(slice_cols(z, b.begin, b.end));
    worst = std::max(worst, max_abs_diff(c, Tensor::identity(b.size())));
  }
  return worst;
}

// Newton at mild correlation (1-d signals), the eigen oracle at strong
// correlation on images.
SuiteResult whitening_suite(const RunConfig& cfg) {
  double newton = 0.0, eigen = 0.0;
  for (std::size_t c : {1u, 4u}) {
    NdppLayer n(conv_config(LayerKind::convolution, c, 2, 1), cfg.seed);
    newton = std::max(newton, whitening_error(n, Var::constant(ar1_batch_1d(64, c, 32, 0.3, cfg.seed + c))));
    NdppLayerConfig ec = conv_config(LayerKind::convolution, c, 2, 2);
    ec.whitener = Whitener::eigen;
    ec.epsilon = 0.0;
    NdppLayer e(ec, cfg.seed);
    eigen = std::max(eigen, whitening_error(e, Var::constant(ar1_batch_2d(16, c, 10, 0.9, cfg.seed + c))));
  }
  return {"whitening", newton <= 1e-3 && eigen <= 1e-8, "newton " + fmt(newton) + " eigen " + fmt(eigen)};
}

SuiteResult one_step_suite(const RunConfig& cfg) {
  double worst = 0.0;
  for (std::uint64_t s = 0; s < 5; ++s) {
    const ToyProblem raw = random_toy_problem(1024, 16, cfg.seed + s);
    ToyProblem p{matmul(raw.x, inverse_sqrt_eigen(covariance(raw.x))), raw.y, false};
    SgdConfig sgd;
    Tensor v;
    const Tensor w0({16, 1}, 0.0);
    const Tensor w1 = gd_step(w0, toy_gradient(p, w0), sgd, v);
    worst = std::max(worst, toy_loss(p, w1) - toy_loss(p, closed_form_solution(p)));
  }
  return {"one-step", worst <= 1e-10, "loss gap " + fmt(worst)};
}

SuiteResult gln_suite(const RunConfig& cfg) {
  const ToyProblem p = random_toy_problem(256, 6, cfg.seed + 2023);
  const Tensor base = ndpp_one_step_predictions(p.x, p.y);
  const Tensor plain = standardized_one_step_predictions(p.x, p.y);
  double nd = 0.0, witness = 0.0;
  for (std::uint64_t s = 1; s <= 5; ++s) {
    const Tensor a = random_invertible(6, 100.0, s);
    nd = std::max(nd, relative_frobenius_error(ndpp_one_step_predictions(matmul(p.x, a), p.y), base));
    witness = std::max(witness, relative_frobenius_error(standardized_one_step_predictions(matmul(p.x, a), p.y), plain));
  }
  return {"gln", nd <= 1e-6 && witness > 1e-3, "ndpp " + fmt(nd) + " standardized " + fmt(witness)};
}

SuiteResult sync_suite(const RunConfig& cfg) {
  NdppLayerConfig c = conv_config(LayerKind::convolution, 2, 2, 2);
  c.scale_mode = ScaleMode::mu_sigma;
  const Tensor x = ar1_batch_2d(16, 2, 6, 0.8, cfg.seed);
  const std::vector<Tensor> ref = allreduce_moments({local_moments({0, x}, c)}).covariances();
  double worst = 0.0;
  for (std::size_t k : {1u, 2u, 4u, 8u}) {
    std::vector<LocalMoments> m;
    for (const WorkerShard& s : shard_batch(x, k)) m.push_back(local_moments(s, c));
    const std::vector<Tensor> got = allreduce_moments(std::move(m)).covariances();
    for (std::size_t b = 0; b < ref.size(); ++b) worst = std::max(worst, max_abs_diff(got[b], ref[b]));
  }
  return {"sync", worst <= 1e-12, "max diff " + fmt(worst)};
}

SuiteResult gradcheck_suite(const RunConfig& cfg) {
  NdppLayerConfig fc;
  fc.in_channels = 4;
  fc.out_channels = 2;
  fc.scale_mode = ScaleMode::mu_sigma;
  NdppLayerConfig conv = conv_config(LayerKind::convolution, 2, 2, 2);
  conv.kernel = 2;
  conv.padding = 0;
  conv.scale_mode = ScaleMode::l1;
  NdppLayerConfig corr = conv_config(LayerKind::correlation, 1, 2, 1);
  corr.scale_mode = ScaleMode::mu_sigma;
  const std::pair<NdppLayerConfig, Shape> cases[] = {{fc, {10, 4}}, {conv, {3, 2, 3, 3}}, {corr, {4, 1, 5}}};
  double worst = 0.0;
  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  auto random = [&](const Shape& s) {
    Tensor t(s);
    for (double& v : t.data()) v = u(rng);
    return t;
  };
  for (auto [c, shape] : cases) {
    c.epsilon = 1e-3;
    NdppLayer layer(c, cfg.seed);
    Tensor probe;
    const auto r = gradcheck(
        [&](std::span<const Var> v) {
          layer.set_weight(v[1]);
          const Var y = layer.forward(v[0]);
          if (probe.empty()) probe = random(y.shape());
          return sum(mul(y, Var::constant(probe)));
        },
        {random(shape), layer.weight().value()});
    worst = std::max(worst, r.max_relative_error);
  }
  return {"gradcheck", worst <= 1e-4, "max relative error " + fmt(worst)};
}

SuiteResult center_surround_suite(const RunConfig& cfg) {
  bool ok = true;
  std::string detail;
  for (double rho : {0.7, 0.8, 0.9}) {
    const KernelReport k = compute_kernel("ar1", 32, rho, cfg.seed);
    ok = ok && k.centre > 0.0 && k.neighbour_mean < 0.0;
    detail += (detail.empty() ? "" : " ") + fmt(k.centre) + "/" + fmt(k.neighbour_mean);
  }
  return {"center-surround", ok, "centre/neighbours " + detail};
}

}  // namespace

std::vector<SuiteResult> run_suites(const std::string& filter, const RunConfig& cfg) {
  using Fn = SuiteResult (*)(const RunConfig&);
  const std::pair<const char*, Fn> table[] = {
      {"whitening", whitening_suite}, {"one-step", one_step_suite},   {"gln", gln_suite},
      {"sync", sync_suite},           {"gradcheck", gradcheck_suite}, {"center-surround", center_surround_suite},
  };
  std::vector<SuiteResult> out;
  for (const auto& [name, fn] : table) {
    if (!filter.empty() && filter != name) continue;
    try {
      out.push_back(fn(cfg));
    } catch (const std::exception& e) {
      out.push_back({name, false, std::string("threw: ") + e.what()});
    }
  }
  return out;
}

}  // namespace ndpp::cli
