#ifndef NDPP_LAYER_CONFIG_HPP
#define NDPP_LAYER_CONFIG_HPP

#include <cstddef>
#include <string>
#include <vector>

#include "ndpp/autodiff.hpp"
#include "ndpp/datamatrix.hpp"
#include "ndpp/matfun.hpp"

namespace ndpp {

enum class ScaleMode { none, mu_sigma, l1 };

/// How the per-block correction D is computed. `eigen` uses the Jacobi
/// oracle and is treated as a constant by the differentiation graph; it
/// exists for validation, not training.
enum class Whitener { newton, eigen };

const char* to_string(ScaleMode mode);
ScaleMode parse_scale_mode(const std::string& name);

struct NdppLayerConfig {
  LayerKind layer_kind = LayerKind::fully_connected;
  std::size_t in_channels = 1;   // input features for fully-connected layers
  std::size_t out_channels = 1;  // output features for fully-connected layers
  std::size_t kernel = 1;
  std::size_t spatial_dims = 2;  // 1 (N x C x L) or 2 (N x C x H x W); conv/corr only
  std::size_t padding = 0;       // ignored for correlation (always k - 1)
  std::size_t stride = 1;        // ignored for correlation (always 1)
  ScaleMode scale_mode = ScaleMode::none;
  std::size_t block_size = 0;    // 0 selects 256 (FC) or 64*k*k (conv/corr)
  std::size_t subsample = 1;
  double epsilon = 1e-5;
  double momentum = 0.9;         // running-average weight on the previous D
  int newton_iterations = 5;
  bool bias = true;
  Whitener whitener = Whitener::newton;
  bool whitening_in_graph = true;
  std::size_t sync_workers = 1;

  /// Throws ContractError on out-of-range fields.
  void validate() const;

  /// Data-matrix width d.
  std::size_t data_columns() const;

  /// Window geometry of the forward pass (subsample = 1) or of the
  /// covariance estimate (subsample = `subsample`).
  ConvGeometry geometry(bool for_covariance) const;

  std::vector<ColumnRange> blocks() const;
};

/// Data matrix used for covariance estimation from an already standardised
/// input: the bias-augmented feature matrix for fully-connected layers, the
/// subsampled window matrix otherwise.
Var covariance_data_matrix(const Var& standardized, const NdppLayerConfig& config);

/// Data matrix consumed by the forward pass (no subsampling).
Var forward_data_matrix(const Var& standardized, const NdppLayerConfig& config, WindowPlan* plan_out = nullptr);

}  // namespace ndpp

#endif  // NDPP_LAYER_CONFIG_HPP
