#include "ndpp/train.hpp"

#include <chrono>
#include <cmath>
#include <iomanip>
#include <ostream>

#include "ndpp/errors.hpp"

namespace ndpp {

double evaluate(Model& model, const Tensor& x, std::span<const int> y, std::size_t batch_size) {
  if (y.empty()) return 0.0;
  model.set_mode(Mode::evaluation);
  std::size_t hit = 0;
  for (std::size_t at = 0; at < y.size(); at += batch_size) {
    const std::size_t end = std::min(at + batch_size, y.size());
    std::vector<std::size_t> idx(end - at);
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = at + i;
    const Tensor scores = model.forward(Var::constant(take_samples(x, idx))).value();
    const std::vector<int> pred = argmax_rows(scores);
    for (std::size_t i = 0; i < pred.size(); ++i) hit += pred[i] == y[at + i] ? 1 : 0;
  }
  model.set_mode(Mode::training);
  return static_cast<double>(hit) / static_cast<double>(y.size());
}

TrainResult train(Model& model, const Dataset& data, const TrainConfig& cfg) {
  cfg.sgd.validate();
  if (cfg.batch_size == 0) throw ContractError("batch size must be positive");
  if (cfg.workers == 0) throw ContractError("workers must be at least 1");
  for (NdppLayer* layer : model.ndpp_layers()) {
    if (layer->config().sync_workers != cfg.workers) {
      throw ContractError("model was built for " + std::to_string(layer->config().sync_workers) +
                          " workers but training uses " + std::to_string(cfg.workers));
    }
  }
  TrainResult result;
  Sgd sgd(cfg.sgd);
  model.set_mode(Mode::training);
  const auto start = std::chrono::steady_clock::now();
  const std::size_t n = data.train_size();
  double last_finite = 0.0;
  std::vector<double> recent_acc;
  std::size_t step = 0;

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    const std::vector<std::size_t> order = epoch_order(n, cfg.seed, epoch);
    for (std::size_t at = 0; at + cfg.batch_size <= n || (at < n && at == 0); at += cfg.batch_size) {
      if (cfg.max_steps != 0 && step >= cfg.max_steps) break;
      const std::size_t end = std::min(at + cfg.batch_size, n);
      if (end - at < cfg.workers) break;
      const std::span<const std::size_t> idx(order.data() + at, end - at);
      std::vector<int> labels(idx.size());
      for (std::size_t i = 0; i < idx.size(); ++i) labels[i] = data.train_y[idx[i]];

      const Var x = Var::constant(take_samples(data.train_x, idx));
      const Var out = model.forward(x);
      const Var loss = model.loss(out, labels);
      ++step;
      const double lv = loss.value().item();
      for (NdppLayer* layer : model.ndpp_layers())
        for (const BlockDiagnostics& d : layer->state().diagnostics) result.newton_failures += d.converged ? 0 : 1;
      if (!std::isfinite(lv) || lv > kDivergenceLoss) {
        result.divergence = Divergence{step, last_finite, lv};
        result.steps = step;
        return result;
      }
      last_finite = lv;
      const double acc = accuracy(out.value(), labels);
      sgd.step(model.parameters(), backprop(loss));

      recent_acc.push_back(acc);
      if (cfg.target_train_acc > 0.0 && !result.target_step && recent_acc.size() >= cfg.target_window) {
        double s = 0.0;
        for (std::size_t i = recent_acc.size() - cfg.target_window; i < recent_acc.size(); ++i) s += recent_acc[i];
        if (s / static_cast<double>(cfg.target_window) >= cfg.target_train_acc) result.target_step = step;
      }
      const bool epoch_end = at + 2 * cfg.batch_size > n;
      if (step % std::max<std::size_t>(cfg.log_every, 1) == 0 || epoch_end) {
        MetricRecord r;
        r.step = step;
        r.epoch = epoch;
        r.train_loss = lv;
        r.train_acc = acc;
        if (cfg.eval_each_log || epoch_end) r.eval_acc = evaluate(model, data.eval_x, data.eval_y);
        r.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
        result.log.push_back(r);
      }
      if (result.target_step) break;
    }
    if (result.target_step || (cfg.max_steps != 0 && step >= cfg.max_steps)) break;
  }
  result.steps = step;
  if (step > 0) result.final_eval_acc = evaluate(model, data.eval_x, data.eval_y);
  return result;
}

void write_metrics_csv(std::ostream& out, const std::vector<MetricRecord>& log) {
  out << kMetricsHeader << '\n';
  out << std::setprecision(10);
  for (const MetricRecord& r : log) {
    out << r.step << ',' << r.epoch << ',' << r.train_loss << ',' << r.train_acc << ',' << r.eval_acc << ','
        << std::setprecision(4) << r.wall_ms << std::setprecision(10) << '\n';
  }
}

}  // namespace ndpp
