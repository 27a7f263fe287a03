#ifndef NDPP_MODEL_HPP
#define NDPP_MODEL_HPP

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "ndpp/layers.hpp"

namespace ndpp {

enum class Flavor { ndpp, bn_baseline, plain };
enum class LossKind { cross_entropy, half_mse };

const char* to_string(Flavor flavor);

/// Options forwarded to every ND++ layer of a model.
struct ModelOptions {
  ScaleMode scale_mode = ScaleMode::none;
  std::size_t block_size = 0;
  std::size_t subsample = 1;
  double epsilon = 1e-5;
  double momentum = 0.9;
  std::size_t sync_workers = 1;
  std::uint64_t seed = 1;
};

class Model {
 public:
  Model(std::string name, LossKind loss) : name_(std::move(name)), loss_(loss) {}

  void add(std::unique_ptr<Module> m) { modules_.push_back(std::move(m)); }
  Var forward(const Var& x);
  /// Loss of the model output against integer labels (one-hot targets for
  /// half_mse).
  Var loss(const Var& output, std::span<const int> labels) const;
  std::vector<Var*> parameters();
  void set_mode(Mode mode);
  std::vector<NdppLayer*> ndpp_layers();

  const std::string& name() const noexcept { return name_; }
  LossKind loss_kind() const noexcept { return loss_; }
  std::size_t size() const noexcept { return modules_.size(); }
  Module& module(std::size_t i) { return *modules_.at(i); }

 private:
  std::string name_;
  LossKind loss_;
  std::vector<std::unique_ptr<Module>> modules_;
};

/// in -> 64 -> 64 -> classes with ReLU.
Model build_mlp(std::size_t in, std::size_t classes, Flavor flavor, const ModelOptions& opts = {});

/// conv 8 (k3, pad 1) -> ReLU -> conv 16 (k3, pad 1, stride 2) -> ReLU ->
/// 2x2 average pool -> fully-connected head. Image shape is C x H x W.
Model build_cnn(const Shape& image, std::size_t classes, Flavor flavor, const ModelOptions& opts = {});

/// Single plain linear layer trained with the half mean-squared error.
Model build_linear(std::size_t in, std::size_t outputs, const ModelOptions& opts = {});

/// Index of the largest entry of each row.
std::vector<int> argmax_rows(const Tensor& scores);
double accuracy(const Tensor& scores, std::span<const int> labels);

}  // namespace ndpp

#endif  // NDPP_MODEL_HPP
