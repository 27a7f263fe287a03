#include <gtest/gtest.h>

#include <cmath>

#include "ndpp/datasets.hpp"
#include "ndpp/errors.hpp"
#include "ndpp/freqdeconv.hpp"
#include "test_util.hpp"

namespace ndpp {
namespace {

using testing::uniform;

TEST(Dft, ImpulseIsFlat) {
  Tensor x({8}, 0.0);
  x[0] = 1.0;
  const Spectrum s = dft(x);
  for (std::size_t i = 0; i < 8; ++i) {
    EXPECT_NEAR(s.re[i], 1.0, 1e-15);
    EXPECT_NEAR(s.im[i], 0.0, 1e-15);
  }
}

TEST(Dft, ConstantHasOnlyDc) {
  const Spectrum s = dft(Tensor({4, 4}, 2.0));
  EXPECT_NEAR(s.re[0], 32.0, 1e-12);
  for (std::size_t i = 1; i < 16; ++i) EXPECT_NEAR(std::hypot(s.re[i], s.im[i]), 0.0, 1e-12);
}

TEST(Dft, RoundTripAndParseval) {
  const Tensor x = uniform({16}, 1);
  EXPECT_LT(relative_frobenius_error(idft(dft(x)), x), 1e-10);
  const Tensor img = uniform({6, 10}, 2);
  EXPECT_LT(relative_frobenius_error(idft(dft(img)), img), 1e-10);
  const Tensor mag = dft(img).magnitude();
  double energy = 0.0, spectral = 0.0;
  for (double v : img.values()) energy += v * v;
  for (double v : mag.values()) spectral += v * v;
  EXPECT_NEAR(energy, spectral / 60.0, 1e-10 * energy);
}

TEST(Dft, MatchesTextbookSum) {
  const Tensor x = uniform({5}, 3);
  const Spectrum s = dft(x);
  for (std::size_t k = 0; k < 5; ++k) {
    double re = 0.0, im = 0.0;
    for (std::size_t t = 0; t < 5; ++t) {
      re += x[t] * std::cos(2 * M_PI * k * t / 5.0);
      im -= x[t] * std::sin(2 * M_PI * k * t / 5.0);
    }
    EXPECT_NEAR(s.re[k], re, 1e-12);
    EXPECT_NEAR(s.im[k], im, 1e-12);
  }
}

TEST(SpectralWhiten, ImpulseUnchanged) {
  Tensor x({16}, 0.0);
  x[0] = 3.0;
  const Tensor y = spectral_whiten(x);
  EXPECT_NEAR(y[0], 1.0, 1e-12);
  for (std::size_t i = 1; i < 16; ++i) EXPECT_NEAR(y[i], 0.0, 1e-12);
}

TEST(SpectralWhiten, ConstantBecomesImpulse) {
  const Tensor y = spectral_whiten(Tensor({8}, 5.0));
  // Only the DC bin carries energy, so the result is the constant 1/n.
  // The other bins hold rounding residue of order 1e-15 which the 1e-12
  // stabiliser maps to about 1e-3, hence the loose pointwise bound.
  double total = 0.0;
  for (std::size_t i = 0; i < 8; ++i) {
    EXPECT_NEAR(y[i], 1.0 / 8.0, 5e-3);
    total += y[i];
  }
  EXPECT_NEAR(total, 1.0, 1e-10);
}

TEST(SpectralWhiten, FlattensAr1Signal) {
  const Tensor x = ar1_signal(64, 0.9, 4);
  const Tensor y = spectral_whiten(x);
  EXPECT_LE(std::abs(circular_autocorrelation(y, 1)), 0.05 * circular_autocorrelation(y, 0));
  const Tensor mag = dft(y).magnitude();
  for (double m : mag.values()) EXPECT_NEAR(m, 1.0, 1e-6);
}

TEST(DeconvKernel, FlatSpectrumGivesCentredImpulse) {
  Tensor x({9, 9}, 0.0);
  x[0] = 1.0;
  const Tensor k = deconv_kernel(x);
  EXPECT_NEAR(k(4, 4), 1.0, 1e-11);
  for (std::size_t i = 0; i < 81; ++i)
    if (i != 40) EXPECT_NEAR(k[i], 0.0, 1e-12);
}

double centre_minus_neighbours(const Tensor& k, double* centre) {
  const std::size_t h = k.rows() / 2, w = k.cols() / 2;
  *centre = k(h, w);
  return (k(h - 1, w) + k(h + 1, w) + k(h, w - 1) + k(h, w + 1)) / 4.0;
}

TEST(DeconvKernel, CentreSurroundOnSmoothImages) {
  for (double rho : {0.7, 0.8, 0.9}) {
    const Tensor k = deconv_kernel(ar1_field(32, 32, rho, 7));
    double centre = 0.0;
    const double ring = centre_minus_neighbours(k, &centre);
    EXPECT_GT(centre, 0.0) << rho;
    EXPECT_LT(ring, 0.0) << rho;
  }
}

TEST(DeconvKernel, SymmetricForSeparableBlur) {
  // Impulse blurred by the same Gaussian along both axes.
  const std::size_t n = 16;
  Tensor img({n, n}, 0.0);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < n; ++c) {
      const double dr = std::min(r, n - r), dc = std::min(c, n - c);
      img(r, c) = std::exp(-(dr * dr + dc * dc) / (2.0 * 1.5 * 1.5));
    }
  const Tensor k = deconv_kernel(img);
  const Tensor kt = transpose(k);
  EXPECT_LE(max_abs_diff(k, kt), 0.05 * max_abs(k));
}

TEST(DeconvKernel, RequiresImage) {
  EXPECT_THROW(deconv_kernel(Tensor({8}, 1.0)), DimensionError);
  EXPECT_GT(deconv_kernel(Tensor({1, 1}, 3.0))[0], 0.0);
}

}  // namespace
}  // namespace ndpp
