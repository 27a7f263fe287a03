#include <gtest/gtest.h>

#include <set>

#include "ndpp/datamatrix.hpp"
#include "ndpp/errors.hpp"
#include "ndpp/matfun.hpp"
#include "test_util.hpp"

namespace ndpp {
namespace {

using testing::uniform;

// Direct window gather over an explicitly padded copy of the input.
Tensor naive_windows(const Tensor& x, std::size_t k, std::size_t pad, std::size_t stride, std::size_t s) {
  const std::size_t n = x.dim(0), c = x.dim(1), h = x.dim(2), w = x.dim(3);
  const std::size_t hp = h + 2 * pad, wp = w + 2 * pad;
  std::vector<double> padded(n * c * hp * wp, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t ch = 0; ch < c; ++ch)
      for (std::size_t r = 0; r < h; ++r)
        for (std::size_t q = 0; q < w; ++q) padded[((i * c + ch) * hp + r + pad) * wp + q + pad] = x.at({i, ch, r, q});
  const std::size_t oh = (hp - k) / stride + 1, ow = (wp - k) / stride + 1;
  std::vector<double> rows;
  std::size_t count = 0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t a = 0; a < oh; a += s)
      for (std::size_t b = 0; b < ow; b += s) {
        for (std::size_t ch = 0; ch < c; ++ch)
          for (std::size_t u = 0; u < k; ++u)
            for (std::size_t v = 0; v < k; ++v)
              rows.push_back(padded[((i * c + ch) * hp + a * stride + u) * wp + b * stride + v]);
        ++count;
      }
  return Tensor({count, c * k * k}, std::move(rows));
}

TEST(BuildFc, BiasColumn) {
  const Tensor x = Tensor::matrix({{1, 2, 3}, {4, 5, 6}});
  const DataMatrix m = build_fc(x, true);
  EXPECT_EQ(m.values.shape(), (Shape{2, 4}));
  EXPECT_EQ(m.values(0, 3), 1.0);
  EXPECT_EQ(m.values(1, 3), 1.0);
  EXPECT_EQ(build_fc(Tensor::matrix({{5}}), false).values.values(), std::vector<double>{5.0});
  const Tensor r = uniform({8, 4}, 1);
  EXPECT_EQ(build_fc(r, false).values.values(), r.values());
}

TEST(BuildConv, OneDimensionalValidWindows) {
  const Tensor x({1, 1, 5}, std::vector<double>{1, 2, 3, 4, 5});
  const DataMatrix m = build_conv(x, 3, 0, 1, 1);
  EXPECT_EQ(m.values.values(), (std::vector<double>{1, 2, 3, 2, 3, 4, 3, 4, 5}));
}

TEST(BuildConv, SingleWindowRowMajor) {
  const Tensor x = uniform({1, 1, 3, 3}, 2);
  const DataMatrix m = build_conv(x, 3, 0, 1, 1);
  EXPECT_EQ(m.values.shape(), (Shape{1, 9}));
  EXPECT_EQ(m.values.values(), x.values());
}

TEST(BuildConv, MatchesGatherOracle) {
  const Tensor x = uniform({2, 2, 4, 4}, 3);
  const DataMatrix m = build_conv(x, 3, 1, 1, 1);
  EXPECT_EQ(m.values.shape(), (Shape{32, 18}));
  EXPECT_EQ(m.values.values(), naive_windows(x, 3, 1, 1, 1).values());
  for (std::size_t stride : {1, 2})
    for (std::size_t s : {1, 2, 3}) {
      const Tensor y = uniform({2, 3, 7, 6}, 4 + s);
      EXPECT_EQ(build_conv(y, 3, 1, stride, s).values.values(), naive_windows(y, 3, 1, stride, s).values());
    }
}

TEST(BuildConv, KernelLargerThanInput) {
  EXPECT_THROW(build_conv(Tensor({1, 1, 2, 2}, 0.0), 3, 0, 1, 1), DimensionError);
}

TEST(BuildCorr, OneDimensionalFullPadding) {
  const Tensor x({1, 1, 2}, std::vector<double>{7, 9});
  const DataMatrix m = build_corr(x, 3, 1);
  EXPECT_EQ(m.values.values(), (std::vector<double>{0, 0, 7, 0, 7, 9, 7, 9, 0, 9, 0, 0}));
}

TEST(BuildCorr, ZerosAndOracle) {
  const DataMatrix z = build_corr(Tensor({2, 1, 3, 3}, 0.0), 2, 1);
  EXPECT_EQ(max_abs(z.values), 0.0);
  const Tensor x = uniform({1, 1, 3, 3}, 5);
  EXPECT_EQ(build_corr(x, 2, 1).values.values(), naive_windows(x, 2, 1, 1, 1).values());
}

// Property: row r of the data matrix dotted with a kernel equals the
// direct nested-loop convolution (cross-correlation form) at r's location.
TEST(DataMatrixProperty, ReconstructsConvolution) {
  const Tensor x = uniform({2, 2, 5, 5}, 6);
  const Tensor w = uniform({2 * 9, 1}, 7);
  const Tensor y = matmul(build_conv(x, 3, 1, 1, 1).values, w);
  std::size_t r = 0;
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t a = 0; a < 5; ++a)
      for (std::size_t b = 0; b < 5; ++b, ++r) {
        double acc = 0.0;
        for (std::size_t ch = 0; ch < 2; ++ch)
          for (std::size_t u = 0; u < 3; ++u)
            for (std::size_t v = 0; v < 3; ++v) {
              const long ii = long(a + u) - 1, jj = long(b + v) - 1;
              if (ii < 0 || jj < 0 || ii >= 5 || jj >= 5) continue;
              acc += x.at({i, ch, std::size_t(ii), std::size_t(jj)}) * w((ch * 3 + u) * 3 + v, 0);
            }
        EXPECT_NEAR(y(r, 0), acc, 1e-14);
      }
}

TEST(DataMatrixProperty, SubsampleIsRowSubset) {
  const Tensor x = uniform({2, 1, 9, 9}, 8);
  const Tensor full = build_conv(x, 3, 1, 1, 1).values;
  std::set<std::vector<double>> rows;
  for (std::size_t r = 0; r < full.rows(); ++r) {
    const Tensor row = slice_rows(full, r, r + 1);
    rows.insert(row.values());
  }
  for (std::size_t s : {2, 3, 5}) {
    const Tensor sub = build_conv(x, 3, 1, 1, s).values;
    EXPECT_LT(sub.rows(), full.rows());
    for (std::size_t r = 0; r < sub.rows(); ++r) EXPECT_TRUE(rows.count(slice_rows(sub, r, r + 1).values()));
  }
}

TEST(DataMatrixProperty, ShiftStructure1d) {
  const Tensor x = uniform({1, 1, 12}, 9);
  const Tensor m = build_conv(x, 4, 0, 1, 1).values;
  for (std::size_t j = 0; j + 1 < 4; ++j)
    for (std::size_t r = 0; r + 1 < m.rows(); ++r) EXPECT_EQ(m(r, j + 1), m(r + 1, j));
}

TEST(ReshapeForBlocks, SlicesAndCovarianceBlocks) {
  const DataMatrix m = build_fc(uniform({8, 6}, 10), false);
  const ColumnRange whole[] = {{0, 6}};
  EXPECT_EQ(reshape_for_blocks(m, whole)[0].values(), m.values.values());
  const ColumnRange thirds[] = {{0, 2}, {2, 4}, {4, 6}};
  const auto parts = reshape_for_blocks(m, thirds);
  EXPECT_EQ(hstack(parts).values(), m.values.values());
  const Tensor full = covariance(m.values);
  for (std::size_t b = 0; b < 3; ++b) {
    const Tensor c = covariance(parts[b]);
    for (std::size_t i = 0; i < 2; ++i)
      for (std::size_t j = 0; j < 2; ++j) EXPECT_EQ(c(i, j), full(2 * b + i, 2 * b + j));
  }
  const ColumnRange gap[] = {{0, 2}, {3, 6}};
  EXPECT_THROW(reshape_for_blocks(m, gap), ContractError);
  const ColumnRange overlap[] = {{0, 4}, {3, 6}};
  EXPECT_THROW(reshape_for_blocks(m, overlap), ContractError);
  const ColumnRange short_cover[] = {{0, 4}};
  EXPECT_THROW(reshape_for_blocks(m, short_cover), ContractError);
}

}  // namespace
}  // namespace ndpp
