#include "ndpp/toy.hpp"

#include <cmath>
#include <random>
#include <vector>

#include "ndpp/autodiff.hpp"
#include "ndpp/errors.hpp"
#include "ndpp/matfun.hpp"
#include "ndpp/ndpp_layer.hpp"

namespace ndpp {

Tensor ToyProblem::design() const {
  if (x.rank() != 2) throw DimensionError("toy problem: X must be N x d");
  if (!with_bias) return x;
  const Tensor parts[] = {x, Tensor({x.rows(), 1}, 1.0)};
  return hstack(parts);
}

namespace {

void check_target(const ToyProblem& p) {
  if (p.y.rank() != 2 || p.y.cols() != 1 || p.y.rows() != p.x.rows()) {
    throw DimensionError("toy problem: y must be N x 1 with N = rows of X");
  }
}

Tensor gaussian(Shape shape, std::mt19937_64& rng) {
  std::normal_distribution<double> dist(0.0, 1.0);
  Tensor t(std::move(shape), 0.0);
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = dist(rng);
  return t;
}

}  // namespace

double toy_loss(const ToyProblem& p, const Tensor& w) {
  check_target(p);
  const Tensor r = sub(matmul(p.design(), w), p.y);
  double s = 0.0;
  for (double v : r.values()) s += v * v;
  return 0.5 * s / static_cast<double>(p.x.rows());
}

Tensor toy_gradient(const ToyProblem& p, const Tensor& w) {
  check_target(p);
  const Tensor x = p.design();
  return scale(matmul_tn(x, sub(matmul(x, w), p.y)), 1.0 / static_cast<double>(x.rows()));
}

Tensor closed_form_solution(const ToyProblem& p) {
  check_target(p);
  const Tensor x = p.design();
  return matmul(inverse_spd(gram(x)), matmul_tn(x, p.y));
}

Tensor newton_step_solution(const ToyProblem& p) {
  check_target(p);
  const Tensor x = p.design();
  const Tensor h = covariance(x);
  const Tensor g0 = toy_gradient(p, Tensor({x.cols(), 1}, 0.0));
  return scale(matmul(inverse_spd(h), g0), -1.0);
}

ToyProblem random_toy_problem(std::size_t n, std::size_t d, std::uint64_t seed, double noise) {
  std::mt19937_64 rng(seed);
  const Tensor z = gaussian({n, d}, rng);
  const Tensor mix = gaussian({d, d}, rng);
  ToyProblem p;
  p.x = matmul(z, mix);
  const Tensor w_true = gaussian({d, 1}, rng);
  p.y = add(matmul(p.x, w_true), scale(gaussian({n, 1}, rng), noise));
  return p;
}

Tensor ndpp_one_step_predictions(const Tensor& x, const Tensor& y) {
  NdppLayerConfig cfg;
  cfg.layer_kind = LayerKind::fully_connected;
  cfg.in_channels = x.cols();
  cfg.out_channels = y.cols();
  cfg.bias = false;
  cfg.epsilon = 0.0;
  cfg.block_size = x.cols();
  cfg.whitener = Whitener::eigen;
  NdppLayer layer(cfg);
  layer.set_weight(Tensor({x.cols(), y.cols()}, 0.0));
  const Var input = Var::constant(x);
  const Gradients g = backprop(half_mse(layer.forward(input), y));
  layer.set_weight(sub(layer.weight().value(), g.of(layer.weight())));
  return layer.forward(input).value();
}

Tensor standardized_one_step_predictions(const Tensor& x, const Tensor& y) {
  const std::size_t n = x.rows(), d = x.cols();
  Tensor z = x;
  for (std::size_t c = 0; c < d; ++c) {
    double m = 0.0;
    for (std::size_t r = 0; r < n; ++r) m += x(r, c);
    m /= static_cast<double>(n);
    double v = 0.0;
    for (std::size_t r = 0; r < n; ++r) v += (x(r, c) - m) * (x(r, c) - m);
    const double sd = std::sqrt(v / static_cast<double>(n));
    for (std::size_t r = 0; r < n; ++r) z(r, c) = (x(r, c) - m) / (sd > 0.0 ? sd : 1.0);
  }
  ToyProblem p{z, y, false};
  const Tensor w = sub(Tensor({d, y.cols()}, 0.0), toy_gradient(p, Tensor({d, y.cols()}, 0.0)));
  return matmul(z, w);
}

Tensor random_orthogonal(std::size_t d, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Tensor q = gaussian({d, d}, rng);
  for (std::size_t j = 0; j < d; ++j) {
    for (std::size_t k = 0; k < j; ++k) {
      double dot = 0.0;
      for (std::size_t i = 0; i < d; ++i) dot += q(i, j) * q(i, k);
      for (std::size_t i = 0; i < d; ++i) q(i, j) -= dot * q(i, k);
    }
    double norm = 0.0;
    for (std::size_t i = 0; i < d; ++i) norm += q(i, j) * q(i, j);
    norm = std::sqrt(norm);
    for (std::size_t i = 0; i < d; ++i) q(i, j) /= norm;
  }
  return q;
}

Tensor random_invertible(std::size_t d, double condition, std::uint64_t seed) {
  if (condition < 1.0) throw ContractError("condition number must be at least 1");
  const Tensor u = random_orthogonal(d, seed);
  const Tensor v = random_orthogonal(d, seed ^ 0x9e3779b97f4a7c15ULL);
  std::vector<double> s(d);
  for (std::size_t i = 0; i < d; ++i) {
    const double t = d == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(d - 1);
    s[i] = std::pow(condition, t);
  }
  return matmul(matmul(u, Tensor::diagonal(s)), transpose(v));
}

}  // namespace ndpp
