#ifndef NDPP_DATAMATRIX_HPP
#define NDPP_DATAMATRIX_HPP

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "ndpp/autodiff.hpp"
#include "ndpp/matfun.hpp"
#include "ndpp/tensor.hpp"

namespace ndpp {

/// Window geometry of a convolution-like layer. `subsample` keeps every
/// s-th output location along each spatial axis, starting at the origin; it
/// only affects which rows the data matrix holds.
struct ConvGeometry {
  std::size_t kernel = 1;
  std::size_t padding = 0;
  std::size_t stride = 1;
  std::size_t subsample = 1;
};

/// Precomputed im2col gather for one input shape. Inputs are N x C x L
/// (1-d) or N x C x H x W (2-d). Rows run sample-major then over the sampled
/// output grid in row-major order; columns are C channel groups of k (1-d)
/// or k*k (2-d) window entries, each group in row-major window order.
/// Index -1 marks a zero-padding position.
struct WindowPlan {
  Shape input_shape;
  std::size_t spatial_dims = 2;
  std::size_t out_h = 1, out_w = 1;          // full output grid
  std::size_t sampled_h = 1, sampled_w = 1;  // after subsampling
  std::size_t rows = 0, cols = 0;
  std::shared_ptr<const std::vector<std::ptrdiff_t>> index;

  std::size_t rows_per_sample() const { return sampled_h * sampled_w; }
};

WindowPlan plan_windows(const Shape& input_shape, const ConvGeometry& geometry);

struct DataMatrix {
  Tensor values;  // N x d
  LayerKind layer_kind = LayerKind::fully_connected;
  std::size_t channels = 0;
  std::size_t kernel = 1;
  std::size_t subsample_stride = 1;
  std::size_t rows_per_sample = 1;
};

/// Stacks the N feature rows, optionally appending an all-ones bias column.
DataMatrix build_fc(const Tensor& x, bool with_bias);

/// Convolution data matrix ("valid" windows over the zero-padded input).
DataMatrix build_conv(const Tensor& x, std::size_t kernel, std::size_t padding, std::size_t stride_conv,
                      std::size_t subsample);

/// Correlation data matrix: the convolution layout with padding k-1 on each
/// side ("full" windows), stride one.
DataMatrix build_corr(const Tensor& x, std::size_t kernel, std::size_t subsample);

/// Column slices for each range. Ranges must tile [0, d) in order.
std::vector<Tensor> reshape_for_blocks(const DataMatrix& x, std::span<const ColumnRange> blocks);

void validate_blocks(std::span<const ColumnRange> blocks, std::size_t d);

// Differentiable counterparts used by the layer transform.
Var fc_data_matrix(const Var& x, bool with_bias);
Var unroll_windows(const Var& x, const WindowPlan& plan);

/// Reorders a (N*out_h*out_w) x C_out row matrix into N x C_out x out_h x out_w
/// (or N x C_out x out_w for 1-d plans).
Var rows_to_channels_first(const Var& rows, const WindowPlan& plan);

}  // namespace ndpp

#endif  // NDPP_DATAMATRIX_HPP
