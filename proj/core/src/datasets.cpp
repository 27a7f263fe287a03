#include "ndpp/datasets.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>

#include "ndpp/errors.hpp"

namespace ndpp {

Shape Dataset::sample_shape() const {
  Shape s = train_x.shape();
  s.erase(s.begin());
  return s;
}

Dataset make_blobs(std::size_t train, std::size_t eval, std::size_t dim, double separation, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> dir(dim);
  double norm = 0.0;
  for (double& v : dir) {
    v = normal(rng);
    norm += v * v;
  }
  for (double& v : dir) v /= std::sqrt(norm);
  auto draw = [&](std::size_t n, Tensor& x, std::vector<int>& y) {
    x = Tensor({n, dim}, 0.0);
    y.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      y[i] = static_cast<int>(i % 2);
      const double sign = y[i] == 1 ? 0.5 : -0.5;
      for (std::size_t j = 0; j < dim; ++j) x(i, j) = sign * separation * dir[j] + normal(rng);
    }
  };
  Dataset d;
  d.name = "blobs";
  draw(train, d.train_x, d.train_y);
  draw(eval, d.eval_x, d.eval_y);
  return d;
}

namespace {

// AR(1) recursion with unit stationary variance, started from its
// stationary distribution.
void ar1_fill(double* out, std::size_t n, std::size_t stride, double rho, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  const double innov = std::sqrt(1.0 - rho * rho);
  double prev = normal(rng);
  out[0] = prev;
  for (std::size_t t = 1; t < n; ++t) {
    prev = rho * prev + innov * normal(rng);
    out[t * stride] = prev;
  }
}

void ar1_field_into(double* out, std::size_t h, std::size_t w, double rho, std::mt19937_64& rng) {
  // Rows first, then filter each column: the separable field has
  // correlation rho^|di| * rho^|dj| and unit variance.
  for (std::size_t r = 0; r < h; ++r) ar1_fill(out + r * w, w, 1, rho, rng);
  const double innov = std::sqrt(1.0 - rho * rho);
  for (std::size_t c = 0; c < w; ++c) {
    for (std::size_t r = 1; r < h; ++r) out[r * w + c] = rho * out[(r - 1) * w + c] + innov * out[r * w + c];
  }
}

}  // namespace

Tensor ar1_signal(std::size_t n, double rho, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Tensor t({n}, 0.0);
  ar1_fill(t.data().data(), n, 1, rho, rng);
  return t;
}

Tensor ar1_field(std::size_t h, std::size_t w, double rho, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Tensor t({h, w}, 0.0);
  ar1_field_into(t.data().data(), h, w, rho, rng);
  return t;
}

Tensor ar1_batch_1d(std::size_t n, std::size_t channels, std::size_t length, double rho, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Tensor t({n, channels, length}, 0.0);
  for (std::size_t i = 0; i < n * channels; ++i) ar1_fill(t.data().data() + i * length, length, 1, rho, rng);
  return t;
}

Tensor ar1_batch_2d(std::size_t n, std::size_t channels, std::size_t size, double rho, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Tensor t({n, channels, size, size}, 0.0);
  for (std::size_t i = 0; i < n * channels; ++i) ar1_field_into(t.data().data() + i * size * size, size, size, rho, rng);
  return t;
}

Dataset make_ar1_images(std::size_t train, std::size_t eval, const Ar1TaskSpec& spec, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const std::size_t s = spec.size;
  auto draw = [&](std::size_t n, Tensor& x, std::vector<int>& y) {
    x = Tensor({n, 1, s, s}, 0.0);
    y.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      y[i] = static_cast<int>(i % 2);
      double* img = x.data().data() + i * s * s;
      ar1_field_into(img, s, s, spec.rho, rng);
      const double sign = y[i] == 1 ? 1.0 : -1.0;
      for (std::size_t r = 0; r < s; ++r)
        for (std::size_t c = 0; c < s; ++c) {
          const double checker = (r + c) % 2 == 0 ? 1.0 : -1.0;
          img[r * s + c] = spec.gain * (img[r * s + c] + sign * spec.amplitude * checker);
        }
    }
  };
  Dataset d;
  d.name = "ar1";
  draw(train, d.train_x, d.train_y);
  draw(eval, d.eval_x, d.eval_y);
  return d;
}

Tensor read_idx(const std::string& path, bool normalize) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ContractError("cannot open IDX file " + path);
  unsigned char head[4];
  if (!in.read(reinterpret_cast<char*>(head), 4) || head[0] != 0 || head[1] != 0) {
    throw ContractError(path + ": not an IDX file");
  }
  if (head[2] != 0x08) throw ContractError(path + ": only unsigned-byte IDX payloads are supported");
  const std::size_t ndims = head[3];
  if (ndims == 0 || ndims > 3) throw ContractError(path + ": unsupported IDX rank");
  Shape dims(ndims);
  for (std::size_t& d : dims) {
    unsigned char b[4];
    if (!in.read(reinterpret_cast<char*>(b), 4)) throw ContractError(path + ": truncated header");
    d = (std::size_t{b[0]} << 24) | (std::size_t{b[1]} << 16) | (std::size_t{b[2]} << 8) | b[3];
  }
  const std::size_t n = shape_size(dims);
  std::vector<unsigned char> raw(n);
  if (!in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(n))) {
    throw ContractError(path + ": truncated payload");
  }
  std::vector<double> values(n);
  for (std::size_t i = 0; i < n; ++i) values[i] = normalize ? raw[i] / 255.0 : raw[i];
  if (ndims == 3) return Tensor({dims[0], 1, dims[1], dims[2]}, std::move(values));
  if (ndims == 1) return Tensor({dims[0], 1}, std::move(values));
  return Tensor(dims, std::move(values));
}

namespace {

std::vector<int> labels_of(const Tensor& t) {
  std::vector<int> y(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) y[i] = static_cast<int>(t[i]);
  return y;
}

bool file_exists(const std::string& path) { return static_cast<bool>(std::ifstream(path)); }

}  // namespace

Dataset load_idx_dataset(const std::string& prefix) {
  Dataset d;
  d.name = "idx:" + prefix;
  Tensor x = read_idx(prefix + "-images.idx", true);
  std::vector<int> y = labels_of(read_idx(prefix + "-labels.idx", false));
  if (x.dim(0) != y.size()) throw ContractError("IDX images and labels disagree in count");
  if (file_exists(prefix + "-eval-images.idx")) {
    d.train_x = std::move(x);
    d.train_y = std::move(y);
    d.eval_x = read_idx(prefix + "-eval-images.idx", true);
    d.eval_y = labels_of(read_idx(prefix + "-eval-labels.idx", false));
  } else {
    const std::size_t n = y.size();
    const std::size_t cut = n - n / 5;
    std::vector<std::size_t> head(cut), tail(n - cut);
    std::iota(head.begin(), head.end(), 0);
    std::iota(tail.begin(), tail.end(), cut);
    d.train_x = take_samples(x, head);
    d.eval_x = take_samples(x, tail);
    d.train_y.assign(y.begin(), y.begin() + static_cast<std::ptrdiff_t>(cut));
    d.eval_y.assign(y.begin() + static_cast<std::ptrdiff_t>(cut), y.end());
  }
  int top = 0;
  for (int v : d.train_y) top = std::max(top, v);
  d.classes = static_cast<std::size_t>(top) + 1;
  return d;
}

std::vector<std::size_t> epoch_order(std::size_t n, std::uint64_t seed, std::size_t epoch) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed * 1000003ULL + epoch);
  std::shuffle(order.begin(), order.end(), rng);
  return order;
}

Tensor take_samples(const Tensor& x, std::span<const std::size_t> indices) {
  Shape s = x.shape();
  const std::size_t per = x.size() / s[0];
  s[0] = indices.size();
  Tensor out(s, 0.0, x.dtype());
  for (std::size_t i = 0; i < indices.size(); ++i) {
    if (indices[i] >= x.dim(0)) throw DimensionError("take_samples: index out of range");
    std::copy_n(x.data().begin() + static_cast<std::ptrdiff_t>(indices[i] * per), per,
                out.data().begin() + static_cast<std::ptrdiff_t>(i * per));
  }
  return out;
}

}  // namespace ndpp
