#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "cli.hpp"
#include "ndpp/errors.hpp"
#include "ndpp/freqdeconv.hpp"

namespace ndpp::cli {
namespace {

// Binary (P5) or ASCII (P2) graymap; comments allowed in the header.
Tensor read_pgm(std::istream& in, const std::string& path) {
  std::string magic;
  in >> magic;
  auto next_int = [&]() {
    in >> std::ws;
    while (in.peek() == '#') {
      std::string skip;
      std::getline(in, skip);
      in >> std::ws;
    }
    long v = -1;
    in >> v;
    if (!in || v < 0) throw ContractError("malformed PGM header in " + path);
    return static_cast<std::size_t>(v);
  };
  const std::size_t w = next_int(), h = next_int(), maxval = next_int();
  if (w == 0 || h == 0 || maxval == 0) throw ContractError("malformed PGM header in " + path);
  if (maxval > 255) throw ContractError("only 8-bit PGM is supported: " + path);
  Tensor img({h, w});
  if (magic == "P5") {
    in.get();
    std::vector<unsigned char> raw(h * w);
    in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (!in) throw ContractError("truncated PGM payload in " + path);
    for (std::size_t i = 0; i < raw.size(); ++i) img[i] = raw[i] / double(maxval);
  } else {
    for (std::size_t i = 0; i < h * w; ++i) img[i] = double(next_int()) / double(maxval);
  }
  return img;
}

// Rows of comma- or whitespace-separated numbers.
Tensor read_text_grid(std::istream& in, const std::string& path) {
  std::vector<double> values;
  std::size_t rows = 0, cols = 0;
  std::string line;
  while (std::getline(in, line)) {
    for (char& ch : line)
      if (ch == ',') ch = ' ';
    std::istringstream ls(line);
    std::size_t n = 0;
    double v;
    while (ls >> v) {
      values.push_back(v);
      ++n;
    }
    if (n == 0) continue;
    if (cols != 0 && n != cols) throw ContractError("ragged rows in " + path);
    cols = n;
    ++rows;
  }
  if (rows == 0) throw ContractError("no numeric data in " + path);
  return Tensor({rows, cols}, std::move(values));
}

Tensor read_image(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open image " + path);
  const int first = in.peek();
  if (first == 'P') return read_pgm(in, path);
  return read_text_grid(in, path);
}

Tensor centre_crop(const Tensor& img, std::size_t size) {
  const std::size_t h = img.dim(0), w = img.dim(1);
  if (h < size || w < size) throw ContractError("image is smaller than the requested kernel size");
  const std::size_t r0 = (h - size) / 2, c0 = (w - size) / 2;
  Tensor out({size, size});
  for (std::size_t r = 0; r < size; ++r)
    for (std::size_t c = 0; c < size; ++c) out(r, c) = img(r0 + r, c0 + c);
  return out;
}

}  // namespace

KernelReport compute_kernel(const std::string& source, std::size_t size, double rho, std::uint64_t seed) {
  if (size == 0) throw ContractError("kernel size must be positive");
  Tensor image;
  if (source == "ar1") {
    image = ar1_field(size, size, rho, seed);
  } else if (source == "noise" || source == "gaussian") {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g;
    image = Tensor({size, size});
    for (double& v : image.data()) v = g(rng);
    // A single Gaussian draw has a Rayleigh-distributed, far from flat,
    // magnitude spectrum; "noise" keeps its random phases at unit magnitude.
    if (source == "noise") image = spectral_whiten(image);
  } else {
    image = centre_crop(read_image(source), size);
  }
  KernelReport r;
  r.kernel = deconv_kernel(image);
  const std::size_t c = size / 2;
  r.centre = r.kernel(c, c);
  double sum = 0.0;
  int count = 0;
  const std::ptrdiff_t offsets[4][2] = {{-1, 0}, {1, 0}, {0, -1}, {0, 1}};
  for (const auto& o : offsets) {
    const std::ptrdiff_t rr = std::ptrdiff_t(c) + o[0], cc = std::ptrdiff_t(c) + o[1];
    if (rr < 0 || cc < 0 || rr >= std::ptrdiff_t(size) || cc >= std::ptrdiff_t(size)) continue;
    sum += r.kernel(std::size_t(rr), std::size_t(cc));
    ++count;
  }
  r.neighbour_mean = count ? sum / count : 0.0;
  for (std::size_t i = 0; i < size; ++i)
    for (std::size_t j = 0; j < size; ++j)
      if (i != c || j != c) r.max_surround = std::max(r.max_surround, std::abs(r.kernel(i, j)));
  return r;
}

}  // namespace ndpp::cli
