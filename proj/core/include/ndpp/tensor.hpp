#ifndef NDPP_TENSOR_HPP
#define NDPP_TENSOR_HPP

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

#include "ndpp/errors.hpp"

namespace ndpp {

/// Storage precision. Values are always held as doubles; an f32 tensor has
/// every element rounded through float after each operation, which gives
/// single-precision arithmetic semantics without a second code path.
enum class Dtype { f64, f32 };

using Shape = std::vector<std::size_t>;

std::string to_string(const Shape& shape);
std::size_t shape_size(const Shape& shape);

/// Dense row-major tensor of rank <= 4. The element (i0,...,ik-1) lives at
/// sum(i_j * stride_j) with the last stride equal to one.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape, double fill = 0.0, Dtype dtype = Dtype::f64);
  Tensor(Shape shape, std::vector<double> data, Dtype dtype = Dtype::f64);

  static Tensor zeros(Shape shape) { return Tensor(std::move(shape), 0.0); }
  static Tensor ones(Shape shape) { return Tensor(std::move(shape), 1.0); }
  static Tensor scalar(double value) { return Tensor(Shape{1}, value); }
  static Tensor identity(std::size_t n);
  static Tensor diagonal(std::span<const double> values);
  static Tensor matrix(std::initializer_list<std::initializer_list<double>> rows);
  static Tensor vector(std::initializer_list<double> values);

  const Shape& shape() const noexcept { return shape_; }
  std::size_t rank() const noexcept { return shape_.size(); }
  std::size_t size() const noexcept { return data_.size(); }
  std::size_t dim(std::size_t axis) const;
  bool empty() const noexcept { return data_.empty(); }
  Dtype dtype() const noexcept { return dtype_; }

  std::span<const double> data() const noexcept { return data_; }
  std::span<double> data() noexcept { return data_; }
  const std::vector<double>& values() const noexcept { return data_; }

  double operator[](std::size_t i) const { return data_[i]; }
  double& operator[](std::size_t i) { return data_[i]; }

  // Rank-2 accessors; no bounds checking beyond debug asserts.
  double operator()(std::size_t r, std::size_t c) const { return data_[r * shape_[1] + c]; }
  double& operator()(std::size_t r, std::size_t c) { return data_[r * shape_[1] + c]; }

  double at(std::initializer_list<std::size_t> index) const;
  double& at(std::initializer_list<std::size_t> index);

  std::size_t rows() const;
  std::size_t cols() const;

  /// Value of a single-element tensor.
  double item() const;

  Tensor reshaped(Shape shape) const;
  Tensor cast(Dtype dtype) const;

  /// Rounds every element through float when dtype is f32; no-op otherwise.
  void apply_precision();

 private:
  std::size_t offset(std::initializer_list<std::size_t> index) const;

  Shape shape_;
  std::vector<double> data_;
  Dtype dtype_ = Dtype::f64;
};

Dtype promote(Dtype a, Dtype b);

// Linear algebra on rank-2 tensors.
Tensor matmul(const Tensor& a, const Tensor& b);
Tensor matmul_tn(const Tensor& a, const Tensor& b);  // a^T * b
Tensor matmul_nt(const Tensor& a, const Tensor& b);  // a * b^T
Tensor transpose(const Tensor& a);
Tensor symmetrize(const Tensor& a);
double trace(const Tensor& a);

// Element-wise. Only scalar-vs-tensor and matching shapes broadcast.
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor div(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double factor);
Tensor add_scalar(const Tensor& a, double value);
Tensor relu(const Tensor& a);

// Reductions.
double sum(const Tensor& a);
double mean(const Tensor& a);
double variance(const Tensor& a);  // population variance
double l1mean(const Tensor& a);    // mean(|x_i|)

// Slicing / stacking on rank-2 tensors.
Tensor slice_cols(const Tensor& a, std::size_t begin, std::size_t end);
Tensor slice_rows(const Tensor& a, std::size_t begin, std::size_t end);
Tensor hstack(std::span<const Tensor> parts);
Tensor vstack(std::span<const Tensor> parts);

// Norms and comparisons.
double frobenius_norm(const Tensor& a);
double max_abs(const Tensor& a);
double max_abs_diff(const Tensor& a, const Tensor& b);
double relative_frobenius_error(const Tensor& approx, const Tensor& reference);
bool all_finite(const Tensor& a);
bool same_shape(const Tensor& a, const Tensor& b);

}  // namespace ndpp

#endif  // NDPP_TENSOR_HPP
