#include "ndpp/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "ndpp/errors.hpp"

namespace ndpp {

namespace {

double evaluate(const std::function<Var(std::span<const Var>)>& f, const std::vector<Tensor>& inputs) {
  std::vector<Var> leaves;
  leaves.reserve(inputs.size());
  for (const Tensor& t : inputs) leaves.push_back(Var::constant(t));
  return f(leaves).value().item();
}

}  // namespace

GradcheckResult gradcheck(const std::function<Var(std::span<const Var>)>& f, const std::vector<Tensor>& inputs,
                          double h) {
  std::vector<Var> leaves;
  leaves.reserve(inputs.size());
  for (const Tensor& t : inputs) leaves.push_back(Var::leaf(t));
  const Gradients grads = backprop(f(leaves));

  GradcheckResult result;
  std::vector<Tensor> probe = inputs;
  for (std::size_t k = 0; k < inputs.size(); ++k) {
    const Tensor analytic = grads.of(leaves[k]);
    Tensor numeric(inputs[k].shape(), 0.0);
    for (std::size_t i = 0; i < inputs[k].size(); ++i) {
      const double x0 = inputs[k][i];
      probe[k][i] = x0 + h;
      const double up = evaluate(f, probe);
      probe[k][i] = x0 - h;
      const double down = evaluate(f, probe);
      probe[k][i] = x0;
      numeric[i] = (up - down) / (2.0 * h);
    }
    const double scale = std::max({frobenius_norm(analytic), frobenius_norm(numeric), 1e-12});
    const double err = frobenius_norm(sub(analytic, numeric)) / scale;
    result.per_input.push_back(err);
    result.max_relative_error = std::max(result.max_relative_error, err);
  }
  return result;
}

}  // namespace ndpp
