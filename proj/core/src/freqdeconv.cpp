#include "ndpp/freqdeconv.hpp"

#include <cmath>
#include <numbers>

#include "ndpp/errors.hpp"

namespace ndpp {

namespace {

void require_signal(const Tensor& x, const char* what) {
  if (x.empty() || (x.rank() != 1 && x.rank() != 2)) {
    throw DimensionError(std::string(what) + ": expected a non-empty 1-d or 2-d signal, got " + to_string(x.shape()));
  }
}

// One DFT pass along a strided line of length n: out[k] = sum_t in[t] e^{sign 2 pi i k t / n}.
void transform_line(const double* re, const double* im, std::size_t n, std::size_t stride, double sign,
                    double* out_re, double* out_im) {
  const double step = sign * 2.0 * std::numbers::pi / static_cast<double>(n);
  for (std::size_t k = 0; k < n; ++k) {
    double sr = 0.0, si = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
      // (k*t) mod n keeps the angle small and the twiddles exact for repeats.
      const double a = step * static_cast<double>((k * t) % n);
      const double c = std::cos(a), s = std::sin(a);
      const double xr = re[t * stride], xi = im[t * stride];
      sr += xr * c - xi * s;
      si += xr * s + xi * c;
    }
    out_re[k * stride] = sr;
    out_im[k * stride] = si;
  }
}

Spectrum transform(Spectrum s, double sign) {
  const Shape shape = s.re.shape();
  const std::size_t h = shape.size() == 2 ? shape[0] : 1;
  const std::size_t w = shape.back();
  std::vector<double> re = s.re.values();
  std::vector<double> im = s.im.values();
  std::vector<double> tr(re.size()), ti(im.size());
  for (std::size_t r = 0; r < h; ++r) {
    transform_line(re.data() + r * w, im.data() + r * w, w, 1, sign, tr.data() + r * w, ti.data() + r * w);
  }
  re.swap(tr);
  im.swap(ti);
  if (h > 1) {
    for (std::size_t c = 0; c < w; ++c) {
      transform_line(re.data() + c, im.data() + c, h, w, sign, tr.data() + c, ti.data() + c);
    }
    re.swap(tr);
    im.swap(ti);
  }
  return {Tensor(shape, std::move(re)), Tensor(shape, std::move(im))};
}

}  // namespace

Tensor Spectrum::magnitude() const {
  Tensor out(re.shape(), 0.0);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::hypot(re[i], im[i]);
  return out;
}

Spectrum dft(const Tensor& x) {
  require_signal(x, "dft");
  return transform({x.cast(Dtype::f64), Tensor(x.shape(), 0.0)}, -1.0);
}

Spectrum idft_complex(const Spectrum& s) {
  require_signal(s.re, "idft");
  if (s.im.shape() != s.re.shape()) throw DimensionError("idft: real and imaginary parts differ in shape");
  Spectrum out = transform(s, 1.0);
  const double inv_n = 1.0 / static_cast<double>(s.re.size());
  out.re = scale(out.re, inv_n);
  out.im = scale(out.im, inv_n);
  return out;
}

Tensor idft(const Spectrum& s) { return idft_complex(s).re; }

Tensor spectral_whiten(const Tensor& x) {
  Spectrum f = dft(x);
  const Tensor mag = f.magnitude();
  for (std::size_t i = 0; i < mag.size(); ++i) {
    const double m = mag[i] + kSpectralFloor;
    f.re[i] /= m;
    f.im[i] /= m;
  }
  return idft(f);
}

Tensor fftshift(const Tensor& x) {
  require_signal(x, "fftshift");
  const std::size_t h = x.rank() == 2 ? x.dim(0) : 1;
  const std::size_t w = x.shape().back();
  Tensor out(x.shape(), 0.0);
  for (std::size_t r = 0; r < h; ++r) {
    for (std::size_t c = 0; c < w; ++c) {
      const std::size_t rr = x.rank() == 2 ? (r + h / 2) % h : 0;
      out[rr * w + (c + w / 2) % w] = x[r * w + c];
    }
  }
  return out;
}

Tensor deconv_kernel(const Tensor& image) {
  if (image.rank() != 2 || image.empty()) {
    throw DimensionError("deconv_kernel: expected a 2-d image, got " + to_string(image.shape()));
  }
  const Tensor mag = dft(image).magnitude();
  Spectrum inv{Tensor(mag.shape(), 0.0), Tensor(mag.shape(), 0.0)};
  for (std::size_t i = 0; i < mag.size(); ++i) inv.re[i] = 1.0 / (mag[i] + kSpectralFloor);
  return fftshift(idft(inv));
}

double circular_autocorrelation(const Tensor& x, std::size_t lag) {
  if (x.rank() != 1 || x.empty()) throw DimensionError("circular_autocorrelation: expected a 1-d signal");
  const std::size_t n = x.size();
  double s = 0.0;
  for (std::size_t t = 0; t < n; ++t) s += x[t] * x[(t + lag) % n];
  return s;
}

}  // namespace ndpp
