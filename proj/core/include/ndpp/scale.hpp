#ifndef NDPP_SCALE_HPP
#define NDPP_SCALE_HPP

#include <vector>

#include "ndpp/autodiff.hpp"
#include "ndpp/layer_config.hpp"
#include "ndpp/tensor.hpp"

namespace ndpp {

/// Lower bound applied to every per-sample divisor. Clamping (rather than
/// adding) keeps the transform exactly invariant to positive rescaling of
/// any sample whose statistic exceeds the bound.
inline constexpr double kScaleFloor = 1e-8;

struct ScaleRecord {
  std::vector<double> shift;    // per-sample mean (zero unless mu_sigma)
  std::vector<double> divisor;  // per-sample sigma or E|x| after clamping; 1 for none
};

struct Standardized {
  Tensor values;
  ScaleRecord record;
};

/// Per-sample standardisation over each sample's whole feature tensor
/// (axis 0 indexes samples):
///   mu_sigma: (x - mean) / max(std, floor)
///   l1:       x / max(mean|x|, floor)
///   none:     identity
Standardized scale_standardize(const Tensor& x, ScaleMode mode);

/// Differentiable version; the statistics stay in the graph.
Var scale_standardize(const Var& x, ScaleMode mode);

}  // namespace ndpp

#endif  // NDPP_SCALE_HPP
