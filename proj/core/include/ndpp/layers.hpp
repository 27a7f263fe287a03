#ifndef NDPP_LAYERS_HPP
#define NDPP_LAYERS_HPP

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "ndpp/autodiff.hpp"
#include "ndpp/ndpp_layer.hpp"

namespace ndpp {

/// A differentiable building block. forward() may record parameters of
/// the module into the graph; parameters() exposes them for the optimiser.
class Module {
 public:
  virtual ~Module() = default;
  virtual Var forward(const Var& x) = 0;
  virtual std::vector<Var*> parameters() { return {}; }
  virtual void set_mode(Mode mode) { mode_ = mode; }
  Mode mode() const noexcept { return mode_; }
  virtual std::string name() const = 0;

 protected:
  Mode mode_ = Mode::training;
};

/// Fully-connected layer x W + b with W stored in x in_features x out_features.
class Linear : public Module {
 public:
  Linear(std::size_t in, std::size_t out, bool bias, std::uint64_t seed);
  Var forward(const Var& x) override;
  std::vector<Var*> parameters() override;
  std::string name() const override { return "linear"; }
  Var& weight() noexcept { return weight_; }
  Var& bias() noexcept { return bias_; }

 private:
  Var weight_;
  Var bias_;
};

/// 2-d convolution through the im2col data matrix (weight C*k*k x out).
class Conv2d : public Module {
 public:
  Conv2d(std::size_t in_channels, std::size_t out_channels, std::size_t kernel, std::size_t padding,
         std::size_t stride, bool bias, std::uint64_t seed);
  Var forward(const Var& x) override;
  std::vector<Var*> parameters() override;
  std::string name() const override { return "conv2d"; }
  Var& weight() noexcept { return weight_; }

 private:
  std::size_t in_channels_, kernel_, padding_, stride_;
  Var weight_;
  Var bias_;
};

/// Wraps an NdppLayer; its mode follows the module mode.
class NdppModule : public Module {
 public:
  explicit NdppModule(NdppLayerConfig config, std::uint64_t seed);
  Var forward(const Var& x) override;
  std::vector<Var*> parameters() override { return layer_.parameters(); }
  void set_mode(Mode mode) override;
  std::string name() const override;
  NdppLayer& layer() noexcept { return layer_; }
  const NdppLayer& layer() const noexcept { return layer_; }

 private:
  NdppLayer layer_;
};

/// Post-normalisation baseline: (z - mean) / sqrt(var + eps) * gamma + beta,
/// per feature (N x F input) or per channel (N x C x H x W input). Training
/// uses batch statistics (population variance) and updates running ones.
class BatchNorm : public Module {
 public:
  explicit BatchNorm(std::size_t features, double momentum = 0.9, double eps = 1e-5);
  Var forward(const Var& x) override;
  std::vector<Var*> parameters() override { return {&gamma_, &beta_}; }
  std::string name() const override { return "batchnorm"; }
  const Tensor& running_mean() const noexcept { return running_mean_; }
  const Tensor& running_var() const noexcept { return running_var_; }

 private:
  std::size_t features_;
  double momentum_, eps_;
  Var gamma_, beta_;
  Tensor running_mean_, running_var_;
  bool seen_batch_ = false;
};

class Relu : public Module {
 public:
  Var forward(const Var& x) override { return relu(x); }
  std::string name() const override { return "relu"; }
};

/// Non-overlapping average pooling with a square window; trailing rows and
/// columns that do not fill a window are dropped.
class AvgPool2d : public Module {
 public:
  explicit AvgPool2d(std::size_t window) : window_(window) {}
  Var forward(const Var& x) override;
  std::string name() const override { return "avgpool2d"; }

 private:
  std::size_t window_;
};

class Flatten : public Module {
 public:
  Var forward(const Var& x) override;
  std::string name() const override { return "flatten"; }
};

/// Per-feature (N x F) or per-channel (N x C x ...) reordering to a rows x
/// features matrix and back, shared by batch-norm style ops.
Var channels_to_rows(const Var& x);
Var rows_to_channels(const Var& rows, const Shape& shape);

}  // namespace ndpp

#endif  // NDPP_LAYERS_HPP
