#include "ndpp/model.hpp"

#include "ndpp/errors.hpp"

namespace ndpp {

const char* to_string(Flavor flavor) {
  switch (flavor) {
    case Flavor::ndpp: return "ndpp";
    case Flavor::bn_baseline: return "bn";
    case Flavor::plain: return "plain";
  }
  return "?";
}

Var Model::forward(const Var& x) {
  Var h = x;
  for (auto& m : modules_) h = m->forward(h);
  return h;
}

Var Model::loss(const Var& output, std::span<const int> labels) const {
  if (loss_ == LossKind::cross_entropy) return softmax_cross_entropy(output, labels);
  const std::size_t n = output.shape()[0], k = output.shape()[1];
  if (labels.size() != n) throw DimensionError("one label per row required");
  Tensor target({n, k}, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    if (labels[i] < 0 || static_cast<std::size_t>(labels[i]) >= k) throw DimensionError("label out of range");
    target(i, static_cast<std::size_t>(labels[i])) = 1.0;
  }
  return half_mse(output, target);
}

std::vector<Var*> Model::parameters() {
  std::vector<Var*> out;
  for (auto& m : modules_)
    for (Var* p : m->parameters()) out.push_back(p);
  return out;
}

void Model::set_mode(Mode mode) {
  for (auto& m : modules_) m->set_mode(mode);
}

std::vector<NdppLayer*> Model::ndpp_layers() {
  std::vector<NdppLayer*> out;
  for (auto& m : modules_)
    if (auto* nd = dynamic_cast<NdppModule*>(m.get())) out.push_back(&nd->layer());
  return out;
}

namespace {

NdppLayerConfig layer_config(const ModelOptions& o) {
  NdppLayerConfig c;
  c.scale_mode = o.scale_mode;
  c.block_size = o.block_size;
  c.subsample = o.subsample;
  c.epsilon = o.epsilon;
  c.momentum = o.momentum;
  c.sync_workers = o.sync_workers;
  return c;
}

std::unique_ptr<Module> ndpp_fc(std::size_t in, std::size_t out, const ModelOptions& o, std::uint64_t seed) {
  NdppLayerConfig c = layer_config(o);
  c.layer_kind = LayerKind::fully_connected;
  c.in_channels = in;
  c.out_channels = out;
  c.subsample = 1;
  return std::make_unique<NdppModule>(c, seed);
}

std::unique_ptr<Module> ndpp_conv(std::size_t in, std::size_t out, std::size_t k, std::size_t pad, std::size_t stride,
                                  const ModelOptions& o, std::uint64_t seed) {
  NdppLayerConfig c = layer_config(o);
  c.layer_kind = LayerKind::convolution;
  c.in_channels = in;
  c.out_channels = out;
  c.kernel = k;
  c.padding = pad;
  c.stride = stride;
  return std::make_unique<NdppModule>(c, seed);
}

}  // namespace

Model build_mlp(std::size_t in, std::size_t classes, Flavor flavor, const ModelOptions& o) {
  Model m(std::string(to_string(flavor)) + "-mlp", LossKind::cross_entropy);
  const std::size_t widths[] = {in, 64, 64};
  std::uint64_t seed = o.seed;
  for (std::size_t i = 0; i + 1 < std::size(widths); ++i) {
    const std::size_t a = widths[i], b = widths[i + 1];
    switch (flavor) {
      case Flavor::ndpp: m.add(ndpp_fc(a, b, o, seed++)); break;
      case Flavor::bn_baseline:
        m.add(std::make_unique<Linear>(a, b, false, seed++));
        m.add(std::make_unique<BatchNorm>(b, o.momentum));
        break;
      case Flavor::plain: m.add(std::make_unique<Linear>(a, b, true, seed++)); break;
    }
    m.add(std::make_unique<Relu>());
  }
  if (flavor == Flavor::ndpp) {
    m.add(ndpp_fc(64, classes, o, seed));
  } else {
    m.add(std::make_unique<Linear>(64, classes, true, seed));
  }
  return m;
}

Model build_cnn(const Shape& image, std::size_t classes, Flavor flavor, const ModelOptions& o) {
  if (image.size() != 3) throw DimensionError("build_cnn: image shape must be C x H x W");
  const std::size_t c = image[0], h = image[1], w = image[2];
  const std::size_t h2 = (h + 2 - 3) / 2 + 1, w2 = (w + 2 - 3) / 2 + 1;
  if (h2 < 2 || w2 < 2) throw DimensionError("build_cnn: image too small");
  const std::size_t features = 16 * (h2 / 2) * (w2 / 2);
  Model m(std::string(to_string(flavor)) + "-cnn", LossKind::cross_entropy);
  std::uint64_t seed = o.seed;
  struct ConvSpec {
    std::size_t in, out, stride;
  };
  const ConvSpec convs[] = {{c, 8, 1}, {8, 16, 2}};
  for (const ConvSpec& s : convs) {
    switch (flavor) {
      case Flavor::ndpp: m.add(ndpp_conv(s.in, s.out, 3, 1, s.stride, o, seed++)); break;
      case Flavor::bn_baseline:
        m.add(std::make_unique<Conv2d>(s.in, s.out, 3, 1, s.stride, false, seed++));
        m.add(std::make_unique<BatchNorm>(s.out, o.momentum));
        break;
      case Flavor::plain: m.add(std::make_unique<Conv2d>(s.in, s.out, 3, 1, s.stride, true, seed++)); break;
    }
    m.add(std::make_unique<Relu>());
  }
  m.add(std::make_unique<AvgPool2d>(2));
  m.add(std::make_unique<Flatten>());
  if (flavor == Flavor::ndpp) {
    m.add(ndpp_fc(features, classes, o, seed));
  } else {
    m.add(std::make_unique<Linear>(features, classes, true, seed));
  }
  return m;
}

Model build_linear(std::size_t in, std::size_t outputs, const ModelOptions& o) {
  Model m("linear", LossKind::half_mse);
  m.add(std::make_unique<Linear>(in, outputs, true, o.seed));
  return m;
}

std::vector<int> argmax_rows(const Tensor& scores) {
  std::vector<int> out(scores.rows());
  for (std::size_t r = 0; r < scores.rows(); ++r) {
    std::size_t best = 0;
    for (std::size_t c = 1; c < scores.cols(); ++c)
      if (scores(r, c) > scores(r, best)) best = c;
    out[r] = static_cast<int>(best);
  }
  return out;
}

double accuracy(const Tensor& scores, std::span<const int> labels) {
  const std::vector<int> pred = argmax_rows(scores);
  if (pred.size() != labels.size()) throw DimensionError("accuracy: one label per row required");
  if (pred.empty()) return 0.0;
  std::size_t hit = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) hit += pred[i] == labels[i] ? 1 : 0;
  return static_cast<double>(hit) / static_cast<double>(pred.size());
}

}  // namespace ndpp
