#ifndef NDPP_DATASETS_HPP
#define NDPP_DATASETS_HPP

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ndpp/tensor.hpp"

namespace ndpp {

struct Dataset {
  std::string name;
  Tensor train_x;  // N x F, or N x C x H x W for images
  std::vector<int> train_y;
  Tensor eval_x;
  std::vector<int> eval_y;
  std::size_t classes = 2;

  bool is_image() const { return train_x.rank() == 4; }
  std::size_t train_size() const { return train_y.size(); }
  /// Per-sample shape (drops axis 0).
  Shape sample_shape() const;
};

/// Two Gaussian blobs in `dim` dimensions with unit covariance and centres
/// at +-separation/2 along a random unit direction.
Dataset make_blobs(std::size_t train, std::size_t eval, std::size_t dim, double separation, std::uint64_t seed);

/// Single-channel h x w images: separable 2-d AR(1) noise with coefficient
/// rho, plus +-amplitude times a fixed checkerboard whose sign is the
/// class; everything multiplied by `gain`. The class signal sits at the
/// highest spatial frequency, where the correlated noise has least power.
struct Ar1TaskSpec {
  std::size_t size = 12;
  double rho = 0.9;
  double amplitude = 0.04;
  double gain = 1.0;
};
Dataset make_ar1_images(std::size_t train, std::size_t eval, const Ar1TaskSpec& spec, std::uint64_t seed);

/// One h x w 2-d AR(1) field with unit marginal variance.
Tensor ar1_field(std::size_t h, std::size_t w, double rho, std::uint64_t seed);

/// Length-n 1-d AR(1) signal with unit marginal variance.
Tensor ar1_signal(std::size_t n, double rho, std::uint64_t seed);

/// N x C x L batch of independent AR(1) signals.
Tensor ar1_batch_1d(std::size_t n, std::size_t channels, std::size_t length, double rho, std::uint64_t seed);

/// N x C x H x W batch of independent 2-d AR(1) fields.
Tensor ar1_batch_2d(std::size_t n, std::size_t channels, std::size_t size, double rho, std::uint64_t seed);

/// Reads an IDX file (big-endian magic, dims, unsigned-byte payload) into a
/// tensor of doubles; images are scaled to [0, 1] when `normalize` is set.
Tensor read_idx(const std::string& path, bool normalize);

/// `<prefix>-images.idx` and `<prefix>-labels.idx` (optionally also
/// `<prefix>-eval-images.idx` / `-eval-labels.idx`); without an eval split the
/// last fifth of the training data is held out.
Dataset load_idx_dataset(const std::string& prefix);

/// Shuffled index order for one epoch.
std::vector<std::size_t> epoch_order(std::size_t n, std::uint64_t seed, std::size_t epoch);

/// Rows `indices` of a sample-major tensor.
Tensor take_samples(const Tensor& x, std::span<const std::size_t> indices);

}  // namespace ndpp

#endif  // NDPP_DATASETS_HPP
