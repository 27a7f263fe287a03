#ifndef NDPP_TOY_HPP
#define NDPP_TOY_HPP

#include <cstdint>

#include "ndpp/tensor.hpp"

namespace ndpp {

/// Least-squares problem Loss(w) = ||X w - y||^2 / (2N).
struct ToyProblem {
  Tensor x;  // N x d
  Tensor y;  // N x 1
  bool with_bias = false;

  /// X, with a ones column appended when with_bias is set.
  Tensor design() const;
};

double toy_loss(const ToyProblem& p, const Tensor& w);
/// X^T (X w - y) / N on the design matrix.
Tensor toy_gradient(const ToyProblem& p, const Tensor& w);

/// (X^T X)^{-1} X^T y via the eigen-oracle inverse. ContractError when X^T X
/// is singular.
Tensor closed_form_solution(const ToyProblem& p);

/// One step w = -H^{-1} grad(0) with H = X^T X / N.
Tensor newton_step_solution(const ToyProblem& p);

/// Random problem with N x d Gaussian features mixed by a fixed random
/// matrix (so features are correlated) and a noisy linear target.
ToyProblem random_toy_problem(std::size_t n, std::size_t d, std::uint64_t seed, double noise = 0.1);

/// Predictions X w after one full-batch step at learning rate 1 from w = 0,
/// with the step taken in the decorrelated basis: the features pass through
/// an FC layer with eigen-oracle whitening, epsilon 0 and a single block.
Tensor ndpp_one_step_predictions(const Tensor& x, const Tensor& y);

/// Same step after per-feature standardisation only ((x - mean) / std per
/// column), the baseline that is not invariant to a change of basis.
Tensor standardized_one_step_predictions(const Tensor& x, const Tensor& y);

/// Random d x d matrix with singular values log-spaced in [1, condition].
Tensor random_invertible(std::size_t d, double condition, std::uint64_t seed);

/// Random orthogonal matrix (Gram-Schmidt on a Gaussian matrix).
Tensor random_orthogonal(std::size_t d, std::uint64_t seed);

}  // namespace ndpp

#endif  // NDPP_TOY_HPP
