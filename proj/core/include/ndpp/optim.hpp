#ifndef NDPP_OPTIM_HPP
#define NDPP_OPTIM_HPP

#include <cstddef>
#include <vector>

#include "ndpp/autodiff.hpp"
#include "ndpp/tensor.hpp"

namespace ndpp {

enum class Schedule { constant, cosine };

struct SgdConfig {
  double learning_rate = 1.0;
  double momentum = 0.0;       // 0 disables the velocity buffer
  double weight_decay = 0.0;
  Schedule schedule = Schedule::constant;
  std::size_t total_steps = 0;  // cosine period; required for cosine

  void validate() const;
  /// Learning rate at 0-based step t.
  double rate_at(std::size_t step) const;
};

/// One update of a single tensor. Weight decay is added to the gradient,
/// the velocity becomes momentum * v + g (left empty when momentum is 0),
/// and w' = w - rate * v.
Tensor gd_step(const Tensor& w, const Tensor& gradient, const SgdConfig& cfg, Tensor& velocity,
               std::size_t step = 0);

/// Same update on a list of parameters, rebinding each to a fresh leaf.
class Sgd {
 public:
  explicit Sgd(SgdConfig cfg);
  void step(const std::vector<Var*>& params, const Gradients& grads);
  std::size_t steps_taken() const noexcept { return step_; }
  const SgdConfig& config() const noexcept { return cfg_; }

 private:
  SgdConfig cfg_;
  std::vector<Tensor> velocity_;
  std::size_t step_ = 0;
};

}  // namespace ndpp

#endif  // NDPP_OPTIM_HPP
