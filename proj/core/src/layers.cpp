#include "ndpp/layers.hpp"

#include <cmath>
#include <random>

#include "ndpp/datamatrix.hpp"
#include "ndpp/errors.hpp"

namespace ndpp {

namespace {

Tensor uniform_init(Shape shape, std::size_t fan_in, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const double bound = std::sqrt(1.0 / static_cast<double>(fan_in));
  std::uniform_real_distribution<double> dist(-bound, bound);
  Tensor t(std::move(shape), 0.0);
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = dist(rng);
  return t;
}

}  // namespace

Linear::Linear(std::size_t in, std::size_t out, bool bias, std::uint64_t seed)
    : weight_(Var::leaf(uniform_init({in, out}, in, seed))) {
  if (bias) bias_ = Var::leaf(Tensor({1, out}, 0.0));
}

Var Linear::forward(const Var& x) {
  if (x.value().rank() != 2 || x.shape()[1] != weight_.shape()[0]) {
    throw DimensionError("linear layer expects N x " + std::to_string(weight_.shape()[0]) + ", got " +
                         to_string(x.shape()));
  }
  Var y = matmul(x, weight_);
  return bias_.defined() ? broadcast(y, bias_, BroadcastOp::add) : y;
}

std::vector<Var*> Linear::parameters() {
  std::vector<Var*> out{&weight_};
  if (bias_.defined()) out.push_back(&bias_);
  return out;
}

Conv2d::Conv2d(std::size_t in_channels, std::size_t out_channels, std::size_t kernel, std::size_t padding,
               std::size_t stride, bool bias, std::uint64_t seed)
    : in_channels_(in_channels),
      kernel_(kernel),
      padding_(padding),
      stride_(stride),
      weight_(Var::leaf(uniform_init({in_channels * kernel * kernel, out_channels}, in_channels * kernel * kernel,
                                     seed))) {
  if (bias) bias_ = Var::leaf(Tensor({1, out_channels}, 0.0));
}

Var Conv2d::forward(const Var& x) {
  if (x.value().rank() != 4 || x.shape()[1] != in_channels_) {
    throw DimensionError("conv2d expects N x " + std::to_string(in_channels_) + " x H x W, got " +
                         to_string(x.shape()));
  }
  const WindowPlan plan = plan_windows(x.shape(), {kernel_, padding_, stride_, 1});
  Var y = matmul(unroll_windows(x, plan), weight_);
  if (bias_.defined()) y = broadcast(y, bias_, BroadcastOp::add);
  return rows_to_channels_first(y, plan);
}

std::vector<Var*> Conv2d::parameters() {
  std::vector<Var*> out{&weight_};
  if (bias_.defined()) out.push_back(&bias_);
  return out;
}

NdppModule::NdppModule(NdppLayerConfig config, std::uint64_t seed) : layer_(std::move(config), seed) {}

Var NdppModule::forward(const Var& x) { return layer_.forward(x); }

void NdppModule::set_mode(Mode mode) {
  Module::set_mode(mode);
  layer_.set_mode(mode);
}

std::string NdppModule::name() const { return std::string("ndpp-") + to_string(layer_.config().layer_kind); }

Var channels_to_rows(const Var& x) {
  const Shape& s = x.shape();
  if (s.size() == 2) return x;
  if (s.size() < 3) throw DimensionError("channels_to_rows: expected N x F or N x C x ...");
  const std::size_t n = s[0], c = s[1], hw = shape_size(s) / (n * c);
  auto index = std::make_shared<std::vector<std::ptrdiff_t>>(n * hw * c);
  std::size_t o = 0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t p = 0; p < hw; ++p)
      for (std::size_t ch = 0; ch < c; ++ch) (*index)[o++] = static_cast<std::ptrdiff_t>((i * c + ch) * hw + p);
  return gather(x, {n * hw, c}, std::move(index));
}

Var rows_to_channels(const Var& rows, const Shape& shape) {
  if (shape.size() == 2) return reshape(rows, shape);
  const std::size_t n = shape[0], c = shape[1], hw = shape_size(shape) / (n * c);
  auto index = std::make_shared<std::vector<std::ptrdiff_t>>(n * c * hw);
  std::size_t o = 0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t ch = 0; ch < c; ++ch)
      for (std::size_t p = 0; p < hw; ++p) (*index)[o++] = static_cast<std::ptrdiff_t>((i * hw + p) * c + ch);
  return gather(rows, shape, std::move(index));
}

BatchNorm::BatchNorm(std::size_t features, double momentum, double eps)
    : features_(features),
      momentum_(momentum),
      eps_(eps),
      gamma_(Var::leaf(Tensor({1, features}, 1.0))),
      beta_(Var::leaf(Tensor({1, features}, 0.0))),
      running_mean_({1, features}, 0.0),
      running_var_({1, features}, 1.0) {}

Var BatchNorm::forward(const Var& x) {
  if (x.value().rank() < 2 || x.shape()[1] != features_) {
    throw DimensionError("batchnorm over " + std::to_string(features_) + " features got " + to_string(x.shape()));
  }
  const Var rows = channels_to_rows(x);
  Var centered, stddev;
  if (mode_ == Mode::training) {
    const Var mu = col_mean(rows);
    centered = broadcast(rows, mu, BroadcastOp::sub);
    const Var var = col_mean(square(centered));
    stddev = sqrt(add_scalar(var, eps_));
    if (!seen_batch_) {
      running_mean_ = mu.value();
      running_var_ = var.value();
      seen_batch_ = true;
    } else {
      running_mean_ = add(scale(running_mean_, momentum_), scale(mu.value(), 1.0 - momentum_));
      running_var_ = add(scale(running_var_, momentum_), scale(var.value(), 1.0 - momentum_));
    }
  } else {
    centered = broadcast(rows, Var::constant(running_mean_), BroadcastOp::sub);
    Tensor sd = running_var_;
    for (std::size_t i = 0; i < sd.size(); ++i) sd[i] = std::sqrt(sd[i] + eps_);
    stddev = Var::constant(sd);
  }
  const Var z = broadcast(centered, stddev, BroadcastOp::div);
  const Var y = broadcast(broadcast(z, gamma_, BroadcastOp::mul), beta_, BroadcastOp::add);
  return rows_to_channels(y, x.shape());
}

Var AvgPool2d::forward(const Var& x) {
  const Shape& s = x.shape();
  if (s.size() != 4) throw DimensionError("avgpool2d expects N x C x H x W, got " + to_string(s));
  const std::size_t n = s[0], c = s[1], h = s[2], w = s[3], k = window_;
  if (k == 0 || h < k || w < k) throw DimensionError("avgpool2d window larger than the input");
  const std::size_t oh = h / k, ow = w / k;
  const double inv = 1.0 / static_cast<double>(k * k);
  const Tensor& v = x.value();
  Tensor out({n, c, oh, ow}, 0.0, v.dtype());
  for (std::size_t p = 0; p < n * c; ++p)
    for (std::size_t i = 0; i < oh; ++i)
      for (std::size_t j = 0; j < ow; ++j) {
        double acc = 0.0;
        for (std::size_t a = 0; a < k; ++a)
          for (std::size_t b = 0; b < k; ++b) acc += v[(p * h + i * k + a) * w + j * k + b];
        out[(p * oh + i) * ow + j] = acc * inv;
      }
  out.apply_precision();
  return make_op(std::move(out), {x}, [=, shape = s](const Tensor& g) {
    Tensor gx(shape, 0.0, g.dtype());
    for (std::size_t p = 0; p < n * c; ++p)
      for (std::size_t i = 0; i < oh; ++i)
        for (std::size_t j = 0; j < ow; ++j) {
          const double gi = g[(p * oh + i) * ow + j] * inv;
          for (std::size_t a = 0; a < k; ++a)
            for (std::size_t b = 0; b < k; ++b) gx[(p * h + i * k + a) * w + j * k + b] = gi;
        }
    return std::vector<Tensor>{gx};
  });
}

Var Flatten::forward(const Var& x) {
  const Shape& s = x.shape();
  if (s.size() < 2) throw DimensionError("flatten expects a batch of tensors");
  return reshape(x, {s[0], shape_size(s) / s[0]});
}

}  // namespace ndpp
