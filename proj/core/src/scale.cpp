#include "ndpp/scale.hpp"

#include <cmath>

namespace ndpp {

const char* to_string(ScaleMode mode) {
  switch (mode) {
    case ScaleMode::none: return "none";
    case ScaleMode::mu_sigma: return "musigma";
    case ScaleMode::l1: return "l1";
  }
  return "unknown";
}

ScaleMode parse_scale_mode(const std::string& name) {
  if (name == "none") return ScaleMode::none;
  if (name == "musigma" || name == "mu_sigma") return ScaleMode::mu_sigma;
  if (name == "l1") return ScaleMode::l1;
  throw ContractError("unknown scale mode '" + name + "'");
}

Var scale_standardize(const Var& x, ScaleMode mode) {
  if (mode == ScaleMode::none) return x;
  const Shape shape = x.shape();
  if (shape.size() < 2) throw DimensionError("scale_standardize: need a leading sample axis");
  const std::size_t n = shape[0];
  const std::size_t features = x.value().size() / n;
  Var rows = reshape(x, {n, features});
  Var out;
  if (mode == ScaleMode::mu_sigma) {
    Var centered = broadcast(rows, row_mean(rows), BroadcastOp::sub);
    Var sigma = sqrt(row_mean(square(centered)));
    out = broadcast(centered, clamp_min(sigma, kScaleFloor), BroadcastOp::div);
  } else {
    out = broadcast(rows, clamp_min(row_l1mean(rows), kScaleFloor), BroadcastOp::div);
  }
  return reshape(out, shape);
}

Standardized scale_standardize(const Tensor& x, ScaleMode mode) {
  if (x.rank() < 2) throw DimensionError("scale_standardize: need a leading sample axis");
  const std::size_t n = x.dim(0);
  const std::size_t features = x.size() / n;
  Standardized out;
  out.values = scale_standardize(Var::constant(x), mode).value();
  out.record.shift.assign(n, 0.0);
  out.record.divisor.assign(n, 1.0);
  if (mode == ScaleMode::none) return out;
  for (std::size_t i = 0; i < n; ++i) {
    const double* row = x.data().data() + i * features;
    double mu = 0.0, l1 = 0.0;
    for (std::size_t j = 0; j < features; ++j) {
      mu += row[j];
      l1 += std::abs(row[j]);
    }
    mu /= static_cast<double>(features);
    l1 /= static_cast<double>(features);
    if (mode == ScaleMode::mu_sigma) {
      double var = 0.0;
      for (std::size_t j = 0; j < features; ++j) var += (row[j] - mu) * (row[j] - mu);
      out.record.shift[i] = mu;
      out.record.divisor[i] = std::max(std::sqrt(var / static_cast<double>(features)), kScaleFloor);
    } else {
      out.record.divisor[i] = std::max(l1, kScaleFloor);
    }
  }
  return out;
}

}  // namespace ndpp
