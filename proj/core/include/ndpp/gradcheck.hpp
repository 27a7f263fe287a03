#ifndef NDPP_GRADCHECK_HPP
#define NDPP_GRADCHECK_HPP

#include <functional>
#include <span>
#include <vector>

#include "ndpp/autodiff.hpp"

namespace ndpp {

struct GradcheckResult {
  /// max over inputs of ||analytic - numeric||_F / max(||analytic||_F, ||numeric||_F, 1e-12)
  double max_relative_error = 0.0;
  std::vector<double> per_input;
};

/// Compares backprop against central differences with step h on every
/// element of every input. `f` must rebuild the graph from the given leaves
/// and return a single-element Var.
GradcheckResult gradcheck(const std::function<Var(std::span<const Var>)>& f, const std::vector<Tensor>& inputs,
                          double h = 1e-5);

}  // namespace ndpp

#endif  // NDPP_GRADCHECK_HPP
