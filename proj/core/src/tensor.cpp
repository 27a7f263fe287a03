#include "ndpp/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace ndpp {

namespace {

constexpr std::size_t kMaxRank = 4;

void require_rank2(const Tensor& a, const char* op) {
  if (a.rank() != 2) {
    throw DimensionError(std::string(op) + ": expected a rank-2 tensor, got " + to_string(a.shape()));
  }
}

void require_same_or_scalar(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() == b.shape() || a.size() == 1 || b.size() == 1) {
    return;
  }
  throw DimensionError(std::string(op) + ": incompatible shapes " + to_string(a.shape()) + " and " +
                       to_string(b.shape()));
}

template <typename Fn>
Tensor zip(const Tensor& a, const Tensor& b, const char* op, Fn fn) {
  require_same_or_scalar(a, b, op);
  const Dtype dt = promote(a.dtype(), b.dtype());
  if (a.shape() == b.shape()) {
    Tensor out(a.shape(), 0.0, dt);
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = fn(a[i], b[i]);
    out.apply_precision();
    return out;
  }
  if (b.size() == 1) {
    Tensor out(a.shape(), 0.0, dt);
    const double s = b[0];
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = fn(a[i], s);
    out.apply_precision();
    return out;
  }
  Tensor out(b.shape(), 0.0, dt);
  const double s = a[0];
  for (std::size_t i = 0; i < b.size(); ++i) out[i] = fn(s, b[i]);
  out.apply_precision();
  return out;
}

}  // namespace

std::string to_string(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << 'x';
    os << shape[i];
  }
  os << ']';
  return os.str();
}

std::size_t shape_size(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

Tensor::Tensor(Shape shape, double fill, Dtype dtype)
    : shape_(std::move(shape)), data_(shape_size(shape_), fill), dtype_(dtype) {
  if (shape_.empty() || shape_.size() > kMaxRank) {
    throw DimensionError("tensor rank must be in [1, 4], got " + to_string(shape_));
  }
  apply_precision();
}

Tensor::Tensor(Shape shape, std::vector<double> data, Dtype dtype)
    : shape_(std::move(shape)), data_(std::move(data)), dtype_(dtype) {
  if (shape_.empty() || shape_.size() > kMaxRank) {
    throw DimensionError("tensor rank must be in [1, 4], got " + to_string(shape_));
  }
  if (shape_size(shape_) != data_.size()) {
    throw DimensionError("shape " + to_string(shape_) + " does not match " + std::to_string(data_.size()) +
                         " elements");
  }
  apply_precision();
}

Tensor Tensor::identity(std::size_t n) {
  Tensor out({n, n});
  for (std::size_t i = 0; i < n; ++i) out(i, i) = 1.0;
  return out;
}

Tensor Tensor::diagonal(std::span<const double> values) {
  const std::size_t n = values.size();
  Tensor out({n, n});
  for (std::size_t i = 0; i < n; ++i) out(i, i) = values[i];
  return out;
}

Tensor Tensor::matrix(std::initializer_list<std::initializer_list<double>> rows) {
  const std::size_t r = rows.size();
  const std::size_t c = r ? rows.begin()->size() : 0;
  std::vector<double> data;
  data.reserve(r * c);
  for (const auto& row : rows) {
    if (row.size() != c) throw DimensionError("Tensor::matrix: ragged rows");
    data.insert(data.end(), row.begin(), row.end());
  }
  return Tensor({r, c}, std::move(data));
}

Tensor Tensor::vector(std::initializer_list<double> values) {
  return Tensor({values.size()}, std::vector<double>(values));
}

std::size_t Tensor::dim(std::size_t axis) const {
  if (axis >= shape_.size()) throw DimensionError("axis out of range for " + to_string(shape_));
  return shape_[axis];
}

std::size_t Tensor::rows() const {
  require_rank2(*this, "rows");
  return shape_[0];
}

std::size_t Tensor::cols() const {
  require_rank2(*this, "cols");
  return shape_[1];
}

std::size_t Tensor::offset(std::initializer_list<std::size_t> index) const {
  if (index.size() != shape_.size()) throw DimensionError("index rank mismatch for " + to_string(shape_));
  std::size_t off = 0;
  std::size_t axis = 0;
  for (std::size_t i : index) {
    if (i >= shape_[axis]) throw DimensionError("index out of range for " + to_string(shape_));
    off = off * shape_[axis] + i;
    ++axis;
  }
  return off;
}

double Tensor::at(std::initializer_list<std::size_t> index) const { return data_[offset(index)]; }
double& Tensor::at(std::initializer_list<std::size_t> index) { return data_[offset(index)]; }

double Tensor::item() const {
  if (data_.size() != 1) throw ContractError("item() on tensor of shape " + to_string(shape_));
  return data_[0];
}

Tensor Tensor::reshaped(Shape shape) const {
  if (shape_size(shape) != data_.size()) {
    throw DimensionError("cannot reshape " + to_string(shape_) + " to " + to_string(shape));
  }
  return Tensor(std::move(shape), data_, dtype_);
}

Tensor Tensor::cast(Dtype dtype) const {
  Tensor out = *this;
  out.dtype_ = dtype;
  out.apply_precision();
  return out;
}

void Tensor::apply_precision() {
  if (dtype_ != Dtype::f32) return;
  for (double& v : data_) v = static_cast<double>(static_cast<float>(v));
}

Dtype promote(Dtype a, Dtype b) { return (a == Dtype::f32 || b == Dtype::f32) ? Dtype::f32 : Dtype::f64; }

Tensor matmul(const Tensor& a, const Tensor& b) {
  require_rank2(a, "matmul");
  require_rank2(b, "matmul");
  const std::size_t n = a.dim(0), k = a.dim(1), m = b.dim(1);
  if (b.dim(0) != k) {
    throw DimensionError("matmul: inner extents differ, " + to_string(a.shape()) + " x " + to_string(b.shape()));
  }
  Tensor out({n, m}, 0.0, promote(a.dtype(), b.dtype()));
  const double* pa = a.data().data();
  const double* pb = b.data().data();
  double* po = out.data().data();
  for (std::size_t i = 0; i < n; ++i) {
    double* row = po + i * m;
    for (std::size_t p = 0; p < k; ++p) {
      const double aip = pa[i * k + p];
      const double* brow = pb + p * m;
      for (std::size_t j = 0; j < m; ++j) row[j] += aip * brow[j];
    }
  }
  out.apply_precision();
  return out;
}

Tensor matmul_tn(const Tensor& a, const Tensor& b) {
  require_rank2(a, "matmul_tn");
  require_rank2(b, "matmul_tn");
  const std::size_t n = a.dim(0), k = a.dim(1), m = b.dim(1);
  if (b.dim(0) != n) {
    throw DimensionError("matmul_tn: row extents differ, " + to_string(a.shape()) + " vs " + to_string(b.shape()));
  }
  Tensor out({k, m}, 0.0, promote(a.dtype(), b.dtype()));
  const double* pa = a.data().data();
  const double* pb = b.data().data();
  double* po = out.data().data();
  for (std::size_t r = 0; r < n; ++r) {
    const double* arow = pa + r * k;
    const double* brow = pb + r * m;
    for (std::size_t i = 0; i < k; ++i) {
      const double v = arow[i];
      double* orow = po + i * m;
      for (std::size_t j = 0; j < m; ++j) orow[j] += v * brow[j];
    }
  }
  out.apply_precision();
  return out;
}

Tensor matmul_nt(const Tensor& a, const Tensor& b) {
  require_rank2(a, "matmul_nt");
  require_rank2(b, "matmul_nt");
  const std::size_t n = a.dim(0), k = a.dim(1), m = b.dim(0);
  if (b.dim(1) != k) {
    throw DimensionError("matmul_nt: column extents differ, " + to_string(a.shape()) + " vs " +
                         to_string(b.shape()));
  }
  Tensor out({n, m}, 0.0, promote(a.dtype(), b.dtype()));
  const double* pa = a.data().data();
  const double* pb = b.data().data();
  double* po = out.data().data();
  for (std::size_t i = 0; i < n; ++i) {
    const double* arow = pa + i * k;
    for (std::size_t j = 0; j < m; ++j) {
      const double* brow = pb + j * k;
      double acc = 0.0;
      for (std::size_t p = 0; p < k; ++p) acc += arow[p] * brow[p];
      po[i * m + j] = acc;
    }
  }
  out.apply_precision();
  return out;
}

Tensor transpose(const Tensor& a) {
  require_rank2(a, "transpose");
  const std::size_t r = a.dim(0), c = a.dim(1);
  Tensor out({c, r}, 0.0, a.dtype());
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) out(j, i) = a(i, j);
  return out;
}

Tensor symmetrize(const Tensor& a) {
  require_rank2(a, "symmetrize");
  if (a.dim(0) != a.dim(1)) throw DimensionError("symmetrize: matrix is not square " + to_string(a.shape()));
  const std::size_t n = a.dim(0);
  Tensor out({n, n}, 0.0, a.dtype());
  for (std::size_t i = 0; i < n; ++i) {
    out(i, i) = a(i, i);
    for (std::size_t j = i + 1; j < n; ++j) {
      const double v = 0.5 * (a(i, j) + a(j, i));
      out(i, j) = v;
      out(j, i) = v;
    }
  }
  out.apply_precision();
  return out;
}

double trace(const Tensor& a) {
  require_rank2(a, "trace");
  if (a.dim(0) != a.dim(1)) throw DimensionError("trace: matrix is not square " + to_string(a.shape()));
  double t = 0.0;
  for (std::size_t i = 0; i < a.dim(0); ++i) t += a(i, i);
  return t;
}

Tensor add(const Tensor& a, const Tensor& b) {
  return zip(a, b, "add", [](double x, double y) { return x + y; });
}
Tensor sub(const Tensor& a, const Tensor& b) {
  return zip(a, b, "sub", [](double x, double y) { return x - y; });
}
Tensor mul(const Tensor& a, const Tensor& b) {
  return zip(a, b, "mul", [](double x, double y) { return x * y; });
}

Tensor div(const Tensor& a, const Tensor& b) {
  return zip(a, b, "div", [](double x, double y) { return x / y; });
}

Tensor scale(const Tensor& a, double factor) {
  Tensor out = a;
  for (double& v : out.data()) v *= factor;
  out.apply_precision();
  return out;
}

Tensor add_scalar(const Tensor& a, double value) {
  Tensor out = a;
  for (double& v : out.data()) v += value;
  out.apply_precision();
  return out;
}

Tensor relu(const Tensor& a) {
  Tensor out = a;
  for (double& v : out.data()) v = v > 0.0 ? v : 0.0;
  return out;
}

double sum(const Tensor& a) {
  double s = 0.0;
  for (double v : a.data()) s += v;
  return s;
}

double mean(const Tensor& a) {
  if (a.empty()) throw ContractError("mean of empty tensor");
  return sum(a) / static_cast<double>(a.size());
}

double variance(const Tensor& a) {
  const double mu = mean(a);
  double s = 0.0;
  for (double v : a.data()) s += (v - mu) * (v - mu);
  return s / static_cast<double>(a.size());
}

double l1mean(const Tensor& a) {
  if (a.empty()) throw ContractError("l1mean of empty tensor");
  double s = 0.0;
  for (double v : a.data()) s += std::abs(v);
  return s / static_cast<double>(a.size());
}

Tensor slice_cols(const Tensor& a, std::size_t begin, std::size_t end) {
  require_rank2(a, "slice_cols");
  if (begin > end || end > a.dim(1)) throw DimensionError("slice_cols: range out of bounds");
  const std::size_t r = a.dim(0), w = end - begin;
  Tensor out({r, w}, 0.0, a.dtype());
  for (std::size_t i = 0; i < r; ++i)
    std::copy_n(a.data().data() + i * a.dim(1) + begin, w, out.data().data() + i * w);
  return out;
}

Tensor slice_rows(const Tensor& a, std::size_t begin, std::size_t end) {
  require_rank2(a, "slice_rows");
  if (begin > end || end > a.dim(0)) throw DimensionError("slice_rows: range out of bounds");
  const std::size_t c = a.dim(1);
  std::vector<double> data(a.data().begin() + static_cast<std::ptrdiff_t>(begin * c),
                           a.data().begin() + static_cast<std::ptrdiff_t>(end * c));
  return Tensor({end - begin, c}, std::move(data), a.dtype());
}

Tensor hstack(std::span<const Tensor> parts) {
  if (parts.empty()) throw ContractError("hstack of nothing");
  const std::size_t r = parts[0].rows();
  std::size_t c = 0;
  Dtype dt = Dtype::f64;
  for (const Tensor& p : parts) {
    if (p.rows() != r) throw DimensionError("hstack: row counts differ");
    c += p.cols();
    dt = promote(dt, p.dtype());
  }
  Tensor out({r, c}, 0.0, dt);
  std::size_t col = 0;
  for (const Tensor& p : parts) {
    for (std::size_t i = 0; i < r; ++i)
      std::copy_n(p.data().data() + i * p.cols(), p.cols(), out.data().data() + i * c + col);
    col += p.cols();
  }
  return out;
}

Tensor vstack(std::span<const Tensor> parts) {
  if (parts.empty()) throw ContractError("vstack of nothing");
  const std::size_t c = parts[0].cols();
  std::size_t r = 0;
  Dtype dt = Dtype::f64;
  for (const Tensor& p : parts) {
    if (p.cols() != c) throw DimensionError("vstack: column counts differ");
    r += p.rows();
    dt = promote(dt, p.dtype());
  }
  std::vector<double> data;
  data.reserve(r * c);
  for (const Tensor& p : parts) data.insert(data.end(), p.data().begin(), p.data().end());
  return Tensor({r, c}, std::move(data), dt);
}

double frobenius_norm(const Tensor& a) {
  double s = 0.0;
  for (double v : a.data()) s += v * v;
  return std::sqrt(s);
}

double max_abs(const Tensor& a) {
  double m = 0.0;
  for (double v : a.data()) m = std::max(m, std::abs(v));
  return m;
}

double max_abs_diff(const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) {
    throw DimensionError("max_abs_diff: shapes differ " + to_string(a.shape()) + " vs " + to_string(b.shape()));
  }
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

double relative_frobenius_error(const Tensor& approx, const Tensor& reference) {
  const double ref = frobenius_norm(reference);
  const double diff = frobenius_norm(sub(approx, reference));
  return ref > 0.0 ? diff / ref : diff;
}

bool all_finite(const Tensor& a) {
  return std::all_of(a.data().begin(), a.data().end(), [](double v) { return std::isfinite(v); });
}

bool same_shape(const Tensor& a, const Tensor& b) { return a.shape() == b.shape(); }

}  // namespace ndpp
