#include "ndpp/layer_config.hpp"

#include <string>

namespace ndpp {

void NdppLayerConfig::validate() const {
  if (in_channels == 0 || out_channels == 0) throw ContractError("layer needs at least one input and output channel");
  if (kernel == 0) throw ContractError("kernel size must be at least 1");
  if (stride == 0) throw ContractError("stride must be at least 1");
  if (subsample == 0) throw ContractError("subsample stride must be at least 1");
  if (!(epsilon >= 0.0)) throw ContractError("epsilon must be non-negative, got " + std::to_string(epsilon));
  if (!(momentum >= 0.0 && momentum <= 1.0)) throw ContractError("running momentum must lie in [0, 1]");
  if (newton_iterations < 0) throw ContractError("newton_iterations must be non-negative");
  if (layer_kind != LayerKind::fully_connected && spatial_dims != 1 && spatial_dims != 2) {
    throw ContractError("spatial_dims must be 1 or 2");
  }
  if (sync_workers == 0) throw ContractError("sync_workers must be at least 1");
  if (layer_kind == LayerKind::fully_connected && kernel != 1) {
    throw ContractError("fully-connected layers use kernel 1");
  }
}

std::size_t NdppLayerConfig::data_columns() const {
  if (layer_kind == LayerKind::fully_connected) return in_channels + (bias ? 1 : 0);
  return in_channels * (spatial_dims == 1 ? kernel : kernel * kernel);
}

ConvGeometry NdppLayerConfig::geometry(bool for_covariance) const {
  ConvGeometry g;
  g.kernel = kernel;
  g.padding = layer_kind == LayerKind::correlation ? kernel - 1 : padding;
  g.stride = layer_kind == LayerKind::correlation ? 1 : stride;
  g.subsample = for_covariance ? subsample : 1;
  return g;
}

std::vector<ColumnRange> NdppLayerConfig::blocks() const {
  BlockPolicy policy;
  policy.fixed_block_size = block_size;
  return partition_columns(data_columns(), layer_kind, kernel, policy);
}

namespace {

Var windows_for(const Var& standardized, const NdppLayerConfig& config, bool for_covariance, WindowPlan* plan_out) {
  const Shape& s = standardized.shape();
  if (s.size() != config.spatial_dims + 2) {
    throw DimensionError(std::string(to_string(config.layer_kind)) + " layer expects a rank-" + std::to_string(config.spatial_dims + 2) + " input, got " +
                         to_string(s));
  }
  if (s[1] != config.in_channels) {
    throw DimensionError("layer expects " + std::to_string(config.in_channels) + " input channels, got " +
                         std::to_string(s[1]));
  }
  WindowPlan plan = plan_windows(s, config.geometry(for_covariance));
  Var out = unroll_windows(standardized, plan);
  if (plan_out) *plan_out = std::move(plan);
  return out;
}

}  // namespace

Var covariance_data_matrix(const Var& standardized, const NdppLayerConfig& config) {
  if (config.layer_kind == LayerKind::fully_connected) {
    if (standardized.value().rank() != 2 || standardized.shape()[1] != config.in_channels) {
      throw DimensionError("fully-connected layer expects N x " + std::to_string(config.in_channels) + " input, got " +
                           to_string(standardized.shape()));
    }
    return fc_data_matrix(standardized, config.bias);
  }
  return windows_for(standardized, config, true, nullptr);
}

Var forward_data_matrix(const Var& standardized, const NdppLayerConfig& config, WindowPlan* plan_out) {
  if (config.layer_kind == LayerKind::fully_connected) return covariance_data_matrix(standardized, config);
  return windows_for(standardized, config, false, plan_out);
}

}  // namespace ndpp
