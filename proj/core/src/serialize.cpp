#include "ndpp/serialize.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#include "ndpp/errors.hpp"

namespace ndpp {

namespace {

template <typename T>
void put(std::ostream& out, T value) {
  static_assert(std::is_trivially_copyable_v<T>);
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  out.write(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template <typename T>
T get(std::istream& in) {
  unsigned char bytes[sizeof(T)];
  if (!in.read(reinterpret_cast<char*>(bytes), sizeof(T))) throw ContractError("layer file truncated");
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  T value;
  std::memcpy(&value, bytes, sizeof(T));
  return value;
}

void put_size(std::ostream& out, std::size_t n) { put<std::uint64_t>(out, n); }
std::size_t get_size(std::istream& in) { return static_cast<std::size_t>(get<std::uint64_t>(in)); }

void put_values(std::ostream& out, const Tensor& t) {
  put_size(out, t.size());
  for (std::size_t i = 0; i < t.size(); ++i) put<double>(out, t[i]);
}

std::vector<double> get_values(std::istream& in, std::size_t limit) {
  const std::size_t n = get_size(in);
  if (n > limit) throw ContractError("layer file: buffer larger than the layer allows");
  std::vector<double> v(n);
  for (double& x : v) x = get<double>(in);
  return v;
}

void put_config(std::ostream& out, const NdppLayerConfig& c) {
  put<std::uint32_t>(out, static_cast<std::uint32_t>(c.layer_kind));
  put_size(out, c.in_channels);
  put_size(out, c.out_channels);
  put_size(out, c.kernel);
  put_size(out, c.spatial_dims);
  put_size(out, c.padding);
  put_size(out, c.stride);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(c.scale_mode));
  put_size(out, c.block_size);
  put_size(out, c.subsample);
  put<double>(out, c.epsilon);
  put<double>(out, c.momentum);
  put<std::int32_t>(out, c.newton_iterations);
  put<std::uint8_t>(out, c.bias ? 1 : 0);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(c.whitener));
  put<std::uint8_t>(out, c.whitening_in_graph ? 1 : 0);
  put_size(out, c.sync_workers);
}

template <typename E>
E get_enum(std::istream& in, std::uint32_t count) {
  const auto v = get<std::uint32_t>(in);
  if (v >= count) throw ContractError("layer file: enum value out of range");
  return static_cast<E>(v);
}

NdppLayerConfig get_config(std::istream& in) {
  NdppLayerConfig c;
  c.layer_kind = get_enum<LayerKind>(in, 3);
  c.in_channels = get_size(in);
  c.out_channels = get_size(in);
  c.kernel = get_size(in);
  c.spatial_dims = get_size(in);
  c.padding = get_size(in);
  c.stride = get_size(in);
  c.scale_mode = get_enum<ScaleMode>(in, 3);
  c.block_size = get_size(in);
  c.subsample = get_size(in);
  c.epsilon = get<double>(in);
  c.momentum = get<double>(in);
  c.newton_iterations = get<std::int32_t>(in);
  c.bias = get<std::uint8_t>(in) != 0;
  c.whitener = get_enum<Whitener>(in, 2);
  c.whitening_in_graph = get<std::uint8_t>(in) != 0;
  c.sync_workers = get_size(in);
  return c;
}

}  // namespace

void save_layers(std::ostream& out, std::span<const NdppLayer* const> layers) {
  out.write(kLayerFileMagic, sizeof(kLayerFileMagic));
  put<std::uint32_t>(out, kLayerFileVersion);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(layers.size()));
  for (const NdppLayer* layer : layers) {
    put_config(out, layer->config());
    put_values(out, layer->weight().value());
    if (layer->bias().defined()) {
      put_values(out, layer->bias().value());
    } else {
      put_size(out, 0);
    }
    const auto& running = layer->state().running_d;
    put_size(out, running.size());
    for (const Tensor& d : running) {
      put_size(out, d.rows());
      for (std::size_t i = 0; i < d.size(); ++i) put<double>(out, d[i]);
    }
  }
  if (!out) throw ContractError("failed writing layer file");
}

std::vector<NdppLayer> load_layers(std::istream& in) {
  char magic[sizeof(kLayerFileMagic)];
  if (!in.read(magic, sizeof(magic)) || std::memcmp(magic, kLayerFileMagic, sizeof(magic)) != 0) {
    throw ContractError("not a layer file (bad magic)");
  }
  const auto version = get<std::uint32_t>(in);
  if (version != kLayerFileVersion) throw ContractError("unsupported layer file version " + std::to_string(version));
  const auto count = get<std::uint32_t>(in);
  std::vector<NdppLayer> layers;
  layers.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    NdppLayer layer(get_config(in));
    const Tensor& w0 = layer.weight().value();
    std::vector<double> w = get_values(in, w0.size());
    if (w.size() != w0.size()) throw ContractError("layer file: weight size does not match config");
    layer.set_weight(Tensor(w0.shape(), std::move(w)));
    std::vector<double> b = get_values(in, layer.bias().defined() ? layer.bias().value().size() : 0);
    if (layer.bias().defined()) {
      if (b.size() != layer.bias().value().size()) throw ContractError("layer file: bias size does not match config");
      layer.set_bias(Tensor(layer.bias().shape(), std::move(b)));
    }
    const std::size_t blocks = get_size(in);
    if (blocks != 0) {
      if (blocks != layer.state().blocks.size()) throw ContractError("layer file: block count does not match config");
      std::vector<Tensor> running;
      for (std::size_t k = 0; k < blocks; ++k) {
        const std::size_t n = get_size(in);
        if (n != layer.state().blocks[k].size()) throw ContractError("layer file: block size does not match config");
        Tensor d({n, n}, 0.0);
        for (std::size_t j = 0; j < d.size(); ++j) d[j] = get<double>(in);
        running.push_back(std::move(d));
      }
      layer.set_running_d(std::move(running));
    }
    layers.push_back(std::move(layer));
  }
  return layers;
}

void save_layers(const std::string& path, std::span<const NdppLayer* const> layers) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ContractError("cannot open " + path + " for writing");
  save_layers(out, layers);
}

std::vector<NdppLayer> load_layers(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ContractError("cannot open " + path);
  return load_layers(in);
}

}  // namespace ndpp
