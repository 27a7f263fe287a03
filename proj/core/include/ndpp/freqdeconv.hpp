#ifndef NDPP_FREQDECONV_HPP
#define NDPP_FREQDECONV_HPP

#include "ndpp/tensor.hpp"

namespace ndpp {

/// Real and imaginary parts of a 1-d (n) or 2-d (h x w) DFT.
struct Spectrum {
  Tensor re;
  Tensor im;

  Tensor magnitude() const;
};

inline constexpr double kSpectralFloor = 1e-12;

/// Unnormalised forward DFT by direct summation (separable along each axis).
Spectrum dft(const Tensor& x);

/// Inverse of dft() (carries the 1/n factor); returns the real part.
Tensor idft(const Spectrum& s);

/// Complex inverse, for callers that need the imaginary residue.
Spectrum idft_complex(const Spectrum& s);

/// x whitened in frequency: idft(F(x) / (|F(x)| + floor)).
Tensor spectral_whiten(const Tensor& x);

/// idft(1 / (|F(x)| + floor)) with the zero-lag entry moved to index
/// (h/2, w/2). 2-d input only.
Tensor deconv_kernel(const Tensor& image);

/// Swaps half-planes so index 0 lands at the centre (n/2 along each axis).
Tensor fftshift(const Tensor& x);

/// Circular autocorrelation sum_t x[t] x[t + lag mod n] of a 1-d signal.
double circular_autocorrelation(const Tensor& x, std::size_t lag);

}  // namespace ndpp

#endif  // NDPP_FREQDECONV_HPP
