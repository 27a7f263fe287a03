#ifndef NDPP_TRAIN_HPP
#define NDPP_TRAIN_HPP

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "ndpp/datasets.hpp"
#include "ndpp/model.hpp"
#include "ndpp/optim.hpp"

namespace ndpp {

struct TrainConfig {
  SgdConfig sgd;
  std::size_t epochs = 1;
  std::size_t batch_size = 64;
  std::size_t workers = 1;      // must match the model's sync_workers
  std::size_t log_every = 1;    // steps between log records
  std::size_t max_steps = 0;    // 0 = no cap
  bool eval_each_log = false;   // otherwise eval accuracy only at epoch ends
  std::uint64_t seed = 1;
  /// Stop once the mean batch accuracy over the last `target_window` steps
  /// reaches this value (0 disables).
  double target_train_acc = 0.0;
  std::size_t target_window = 5;
};

struct MetricRecord {
  std::size_t step = 0;  // 1-based
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double train_acc = 0.0;  // accuracy on the step's batch, before the update
  double eval_acc = -1.0;  // -1 when not evaluated at this record
  double wall_ms = 0.0;
};

inline constexpr double kDivergenceLoss = 1e6;

struct Divergence {
  std::size_t step = 0;
  double last_finite_loss = 0.0;
  double offending_loss = 0.0;
};

struct TrainResult {
  std::vector<MetricRecord> log;
  std::optional<Divergence> divergence;
  std::size_t steps = 0;
  /// First step at which the windowed batch accuracy met the target.
  std::optional<std::size_t> target_step;
  double final_eval_acc = -1.0;
  std::size_t newton_failures = 0;  // blocks whose residual exceeded the failure bound
};

/// Mini-batch training. Each step fits ND++ statistics on the batch (through
/// the simulated workers when cfg.workers > 1), runs forward/backward and
/// applies SGD. Stops early on divergence (loss > 1e6 or non-finite).
TrainResult train(Model& model, const Dataset& data, const TrainConfig& cfg);

/// Accuracy of `model` in evaluation mode on the given split.
double evaluate(Model& model, const Tensor& x, std::span<const int> y, std::size_t batch_size = 256);

void write_metrics_csv(std::ostream& out, const std::vector<MetricRecord>& log);
inline constexpr const char* kMetricsHeader = "step,epoch,train_loss,train_acc,eval_acc,wall_ms";

}  // namespace ndpp

#endif  // NDPP_TRAIN_HPP
