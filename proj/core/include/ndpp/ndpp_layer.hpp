#ifndef NDPP_NDPP_LAYER_HPP
#define NDPP_NDPP_LAYER_HPP

#include <cstdint>
#include <vector>

#include "ndpp/autodiff.hpp"
#include "ndpp/layer_config.hpp"
#include "ndpp/matfun.hpp"
#include "ndpp/tensor.hpp"

namespace ndpp {

enum class Mode { training, evaluation };

struct BlockDiagnostics {
  double residual = 0.0;
  int iterations = 0;
  bool converged = true;
};

struct WhiteningState {
  std::vector<ColumnRange> blocks;
  std::vector<Var> batch_d;        // from the most recent fit, graph-connected
  std::vector<Tensor> running_d;   // EMA of batch_d, read only in evaluation
  std::vector<BlockDiagnostics> diagnostics;
  std::size_t fits = 0;
};

/// Linear, convolution or correlation layer computing y = (S x) D w: per-sample
/// scale standardisation S, block-diagonal decorrelation D estimated from the
/// batch, and the layer weight w. The forward pass folds D into the weight.
///
/// The weight is held in data-matrix layout, d x out, where d is the
/// data-matrix width (the FC bias is its last row). Conv/corr layers carry a
/// separate 1 x out bias added after the product.
class NdppLayer {
 public:
  explicit NdppLayer(NdppLayerConfig config, std::uint64_t seed = 1);

  const NdppLayerConfig& config() const noexcept { return config_; }
  const WhiteningState& state() const noexcept { return state_; }

  const Var& weight() const noexcept { return weight_; }
  const Var& bias() const noexcept { return bias_; }  // undefined for FC or bias = false
  /// Parameters in a fixed order (weight, then bias if any) for optimisers.
  std::vector<Var*> parameters();
  void set_weight(const Tensor& w);
  /// Binds an existing graph node as the weight (e.g. a leaf owned by a
  /// gradient check).
  void set_weight(const Var& w);
  void set_bias(const Tensor& b);
  void set_running_d(std::vector<Tensor> running);

  void set_mode(Mode mode) noexcept { mode_ = mode; }
  Mode mode() const noexcept { return mode_; }

  /// Estimates D on this batch (training mode only) and folds it into the
  /// running average. With sync_workers > 1 the covariance is assembled from
  /// simulated per-worker moments.
  void fit_whitening(const Var& x);

  /// Weight-fused forward. In training mode a batch other than the last one
  /// fitted is fitted first; evaluation reads the running average and throws
  /// ContractError before any fit.
  Var forward(const Var& x);

  /// Same output computed as ((S X) D) w, for checking the fusion.
  Var forward_explicit(const Var& x);

  /// (S X_cov) D with the covariance-geometry data matrix of the last fitted
  /// batch, i.e. the matrix whose per-block covariance should be I.
  Var whitened_data_matrix(const Var& x);

  /// The blocks of D currently used by forward().
  std::vector<Var> active_d() const;

 private:
  struct Prepared {
    Var data;  // forward data matrix of S x
    WindowPlan plan;
  };
  Prepared prepare(const Var& x);
  Var finish(const Var& rows, const WindowPlan& plan) const;
  void ensure_fitted(const Var& x);

  NdppLayerConfig config_;
  Mode mode_ = Mode::training;
  Var weight_;
  Var bias_;
  WhiteningState state_;
  Var fitted_input_;
  Var fitted_standardized_;
};

/// blockdiag(D) * w, block by block over the rows of w.
Var fuse_weight(std::span<const Var> d, std::span<const ColumnRange> blocks, const Var& w);

}  // namespace ndpp

#endif  // NDPP_NDPP_LAYER_HPP
