#include "ndpp/optim.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "ndpp/errors.hpp"

namespace ndpp {

void SgdConfig::validate() const {
  if (!(learning_rate > 0.0)) throw ContractError("learning rate must be positive");
  if (!(momentum >= 0.0 && momentum < 1.0)) throw ContractError("momentum must lie in [0, 1)");
  if (!(weight_decay >= 0.0)) throw ContractError("weight decay must be non-negative");
  if (schedule == Schedule::cosine && total_steps == 0) throw ContractError("cosine schedule needs total_steps");
}

double SgdConfig::rate_at(std::size_t step) const {
  if (schedule == Schedule::constant) return learning_rate;
  const double t = static_cast<double>(std::min(step, total_steps)) / static_cast<double>(total_steps);
  return 0.5 * learning_rate * (1.0 + std::cos(std::numbers::pi * t));
}

Tensor gd_step(const Tensor& w, const Tensor& gradient, const SgdConfig& cfg, Tensor& velocity, std::size_t step) {
  if (w.shape() != gradient.shape()) {
    throw DimensionError("gd_step: gradient " + to_string(gradient.shape()) + " does not match weight " +
                         to_string(w.shape()));
  }
  Tensor g = cfg.weight_decay > 0.0 ? add(gradient, scale(w, cfg.weight_decay)) : gradient;
  if (cfg.momentum > 0.0) {
    velocity = velocity.empty() ? g : add(scale(velocity, cfg.momentum), g);
    g = velocity;
  }
  return sub(w, scale(g, cfg.rate_at(step)));
}

Sgd::Sgd(SgdConfig cfg) : cfg_(cfg) { cfg_.validate(); }

void Sgd::step(const std::vector<Var*>& params, const Gradients& grads) {
  if (velocity_.size() != params.size()) velocity_.assign(params.size(), Tensor());
  for (std::size_t i = 0; i < params.size(); ++i) {
    Var& p = *params[i];
    *params[i] = Var::leaf(gd_step(p.value(), grads.of(p), cfg_, velocity_[i], step_));
  }
  ++step_;
}

}  // namespace ndpp
