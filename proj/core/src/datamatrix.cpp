#include "ndpp/datamatrix.hpp"

#include <string>

namespace ndpp {

WindowPlan plan_windows(const Shape& input_shape, const ConvGeometry& g) {
  if (input_shape.size() != 3 && input_shape.size() != 4) {
    throw DimensionError("windowed data matrix needs an N x C x L or N x C x H x W input, got " +
                         to_string(input_shape));
  }
  if (g.kernel == 0 || g.stride == 0 || g.subsample == 0) {
    throw ContractError("kernel, stride and subsample must all be positive");
  }
  WindowPlan plan;
  plan.input_shape = input_shape;
  plan.spatial_dims = input_shape.size() - 2;
  const std::size_t n = input_shape[0];
  const std::size_t c = input_shape[1];
  const std::size_t h = plan.spatial_dims == 2 ? input_shape[2] : 1;
  const std::size_t w = input_shape.back();
  const std::size_t kh = plan.spatial_dims == 2 ? g.kernel : 1;
  const std::size_t kw = g.kernel;
  const std::size_t ph = plan.spatial_dims == 2 ? g.padding : 0;
  const std::size_t pw = g.padding;
  if (h + 2 * ph < kh || w + 2 * pw < kw) {
    throw DimensionError("kernel " + std::to_string(g.kernel) + " is larger than the padded input " +
                         to_string(input_shape));
  }
  plan.out_h = (h + 2 * ph - kh) / g.stride + 1;
  plan.out_w = (w + 2 * pw - kw) / g.stride + 1;
  plan.sampled_h = (plan.out_h + g.subsample - 1) / g.subsample;
  plan.sampled_w = (plan.out_w + g.subsample - 1) / g.subsample;
  plan.rows = n * plan.sampled_h * plan.sampled_w;
  plan.cols = c * kh * kw;

  auto index = std::make_shared<std::vector<std::ptrdiff_t>>(plan.rows * plan.cols, -1);
  std::size_t r = 0;
  for (std::size_t s = 0; s < n; ++s) {
    for (std::size_t oi = 0; oi < plan.out_h; oi += g.subsample) {
      for (std::size_t oj = 0; oj < plan.out_w; oj += g.subsample) {
        std::ptrdiff_t* row = index->data() + r * plan.cols;
        std::size_t col = 0;
        for (std::size_t ch = 0; ch < c; ++ch) {
          for (std::size_t ki = 0; ki < kh; ++ki) {
            for (std::size_t kj = 0; kj < kw; ++kj, ++col) {
              const auto ii = static_cast<std::ptrdiff_t>(oi * g.stride + ki) - static_cast<std::ptrdiff_t>(ph);
              const auto jj = static_cast<std::ptrdiff_t>(oj * g.stride + kj) - static_cast<std::ptrdiff_t>(pw);
              if (ii < 0 || jj < 0 || ii >= static_cast<std::ptrdiff_t>(h) || jj >= static_cast<std::ptrdiff_t>(w)) {
                continue;
              }
              row[col] = static_cast<std::ptrdiff_t>(((s * c + ch) * h + static_cast<std::size_t>(ii)) * w +
                                                     static_cast<std::size_t>(jj));
            }
          }
        }
        ++r;
      }
    }
  }
  plan.index = std::move(index);
  return plan;
}

namespace {

DataMatrix windowed(const Tensor& x, LayerKind kind, const ConvGeometry& g) {
  const WindowPlan plan = plan_windows(x.shape(), g);
  DataMatrix out;
  out.values = unroll_windows(Var::constant(x), plan).value();
  out.layer_kind = kind;
  out.channels = x.dim(1);
  out.kernel = g.kernel;
  out.subsample_stride = g.subsample;
  out.rows_per_sample = plan.rows_per_sample();
  return out;
}

}  // namespace

DataMatrix build_fc(const Tensor& x, bool with_bias) {
  if (x.rank() != 2) throw DimensionError("build_fc: expected N x d input, got " + to_string(x.shape()));
  DataMatrix out;
  out.values = fc_data_matrix(Var::constant(x), with_bias).value();
  out.layer_kind = LayerKind::fully_connected;
  out.channels = x.dim(1);
  return out;
}

DataMatrix build_conv(const Tensor& x, std::size_t kernel, std::size_t padding, std::size_t stride_conv,
                      std::size_t subsample) {
  return windowed(x, LayerKind::convolution, {kernel, padding, stride_conv, subsample});
}

DataMatrix build_corr(const Tensor& x, std::size_t kernel, std::size_t subsample) {
  if (kernel == 0) throw ContractError("build_corr: kernel must be positive");
  return windowed(x, LayerKind::correlation, {kernel, kernel - 1, 1, subsample});
}

void validate_blocks(std::span<const ColumnRange> blocks, std::size_t d) {
  std::size_t expected = 0;
  for (const ColumnRange& r : blocks) {
    if (r.begin != expected || r.end <= r.begin) {
      throw ContractError("column blocks must tile [0, d) in order without gaps or overlaps");
    }
    expected = r.end;
  }
  if (expected != d) throw ContractError("column blocks do not cover all " + std::to_string(d) + " columns");
}

std::vector<Tensor> reshape_for_blocks(const DataMatrix& x, std::span<const ColumnRange> blocks) {
  validate_blocks(blocks, x.values.cols());
  std::vector<Tensor> out;
  out.reserve(blocks.size());
  for (const ColumnRange& r : blocks) out.push_back(slice_cols(x.values, r.begin, r.end));
  return out;
}

Var fc_data_matrix(const Var& x, bool with_bias) {
  if (x.value().rank() != 2) throw DimensionError("fc data matrix: expected N x d input");
  if (!with_bias) return x;
  const Var ones = Var::constant(Tensor({x.value().dim(0), 1}, 1.0, x.value().dtype()));
  const Var parts[] = {x, ones};
  return hstack(parts);
}

Var unroll_windows(const Var& x, const WindowPlan& plan) {
  if (x.shape() != plan.input_shape) {
    throw DimensionError("input shape " + to_string(x.shape()) + " does not match plan " +
                         to_string(plan.input_shape));
  }
  return gather(x, {plan.rows, plan.cols}, plan.index);
}

Var rows_to_channels_first(const Var& rows, const WindowPlan& plan) {
  const Tensor& v = rows.value();
  const std::size_t n = plan.input_shape[0];
  const std::size_t hw = plan.sampled_h * plan.sampled_w;
  if (v.rank() != 2 || v.dim(0) != n * hw) {
    throw DimensionError("rows_to_channels_first: expected " + std::to_string(n * hw) + " rows, got " +
                         to_string(v.shape()));
  }
  const std::size_t c = v.dim(1);
  auto index = std::make_shared<std::vector<std::ptrdiff_t>>(n * c * hw);
  std::size_t o = 0;
  for (std::size_t s = 0; s < n; ++s)
    for (std::size_t ch = 0; ch < c; ++ch)
      for (std::size_t p = 0; p < hw; ++p) (*index)[o++] = static_cast<std::ptrdiff_t>((s * hw + p) * c + ch);
  Shape shape = plan.spatial_dims == 2 ? Shape{n, c, plan.sampled_h, plan.sampled_w} : Shape{n, c, plan.sampled_w};
  return gather(rows, std::move(shape), std::move(index));
}

}  // namespace ndpp
