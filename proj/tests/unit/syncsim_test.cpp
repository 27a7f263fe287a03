#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "ndpp/datasets.hpp"
#include "ndpp/errors.hpp"
#include "ndpp/scale.hpp"
#include "ndpp/syncsim.hpp"
#include "test_util.hpp"

namespace ndpp {
namespace {

using testing::gaussian;

NdppLayerConfig conv_cfg() {
  NdppLayerConfig c;
  c.layer_kind = LayerKind::convolution;
  c.in_channels = 2;
  c.out_channels = 2;
  c.kernel = 3;
  c.padding = 1;
  c.block_size = 8;
  c.scale_mode = ScaleMode::l1;
  c.subsample = 2;
  return c;
}

TEST(ShardBatch, Sizes) {
  const Tensor x = gaussian({8, 3}, 1);
  auto s = shard_batch(x, 2);
  ASSERT_EQ(s.size(), 2u);
  EXPECT_EQ(s[0].batch.dim(0), 4u);
  EXPECT_EQ(s[1].batch.dim(0), 4u);
  s = shard_batch(gaussian({7, 3}, 1), 2);
  EXPECT_EQ(s[0].batch.dim(0), 4u);
  EXPECT_EQ(s[1].batch.dim(0), 3u);
  s = shard_batch(x, 1);
  ASSERT_EQ(s.size(), 1u);
  EXPECT_EQ(s[0].batch.values(), x.values());
  EXPECT_THROW(shard_batch(x, 9), ContractError);
  EXPECT_THROW(shard_batch(x, 0), ContractError);
}

TEST(ShardBatch, DisjointContiguousPartition) {
  const Tensor x = gaussian({11, 2, 3, 3}, 2);
  const auto shards = shard_batch(x, 4);
  std::vector<double> joined;
  std::size_t total = 0;
  for (const auto& s : shards) {
    joined.insert(joined.end(), s.batch.values().begin(), s.batch.values().end());
    total += s.batch.dim(0);
  }
  EXPECT_EQ(total, 11u);
  EXPECT_EQ(joined, x.values());
}

TEST(LocalMoments, SingleShardEqualsScaledCovariance) {
  NdppLayerConfig c = conv_cfg();
  c.block_size = 0;
  const Tensor x = ar1_batch_2d(6, 2, 5, 0.5, 3);
  const auto m = local_moments(shard_batch(x, 1)[0], c);
  const Tensor xs = scale_standardize(x, c.scale_mode).values;
  const Tensor data = build_conv(xs, 3, 1, 1, 2).values;
  EXPECT_EQ(m.rows, data.rows());
  EXPECT_EQ(scale(m.gram[0], 1.0 / double(m.rows)).values(), covariance(data).values());
}

TEST(LocalMoments, ZeroShardGivesZeroMoments) {
  const auto m = local_moments({0, Tensor({3, 2, 4, 4}, 0.0)}, conv_cfg());
  for (const Tensor& g : m.gram) EXPECT_EQ(max_abs(g), 0.0);
}

TEST(LocalMoments, MatchesTwoLoopOracle) {
  const NdppLayerConfig c = conv_cfg();
  const Tensor x = ar1_batch_2d(4, 2, 6, 0.7, 4);
  const auto m = local_moments({0, x}, c);
  const Tensor data = build_conv(scale_standardize(x, c.scale_mode).values, 3, 1, 1, 2).values;
  const auto blocks = c.blocks();
  ASSERT_EQ(m.gram.size(), blocks.size());
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    const Tensor oracle = scale(testing::naive_covariance(slice_cols(data, blocks[b].begin, blocks[b].end)),
                                double(data.rows()));
    EXPECT_LT(max_abs_diff(m.gram[b], oracle), 1e-12);
  }
}

TEST(Allreduce, SingleWorkerIsIdentity) {
  const auto m = local_moments({0, ar1_batch_2d(5, 2, 5, 0.5, 5)}, conv_cfg());
  const auto agg = allreduce_moments({m});
  for (std::size_t b = 0; b < m.gram.size(); ++b) EXPECT_EQ(agg.gram[b].values(), m.gram[b].values());
  EXPECT_EQ(agg.rows, m.rows);
}

TEST(Allreduce, IdenticalShardsGiveSameCovariance) {
  const Tensor x = ar1_batch_2d(3, 2, 5, 0.5, 6);
  auto a = local_moments({0, x}, conv_cfg());
  auto b = local_moments({1, x}, conv_cfg());
  const auto agg = allreduce_moments({a, b});
  const auto single = allreduce_moments({a}).covariances();
  const auto both = agg.covariances();
  for (std::size_t k = 0; k < both.size(); ++k) EXPECT_EQ(both[k].values(), single[k].values());
}

TEST(Allreduce, MatchesConcatenatedBatch) {
  const NdppLayerConfig c = conv_cfg();
  for (std::size_t k : {2, 4, 8}) {
    const Tensor x = ar1_batch_2d(8 * 2 + 3, 2, 6, 0.8, 10 + k);
    std::vector<LocalMoments> local;
    for (const auto& s : shard_batch(x, k)) local.push_back(local_moments(s, c));
    const auto agg = allreduce_moments(local).covariances();
    const auto whole = allreduce_moments({local_moments({0, x}, c)}).covariances();
    for (std::size_t b = 0; b < agg.size(); ++b) EXPECT_LT(max_abs_diff(agg[b], whole[b]), 1e-12) << k;
    const auto reg_a = allreduce_moments(local).regularized(c.epsilon);
    const auto reg_w = allreduce_moments({local_moments({0, x}, c)}).regularized(c.epsilon);
    for (std::size_t b = 0; b < agg.size(); ++b) {
      EXPECT_LT(max_abs_diff(inverse_sqrt_eigen(reg_a[b]), inverse_sqrt_eigen(reg_w[b])), 1e-10) << k;
    }
  }
}

TEST(Allreduce, OrderIndependent) {
  const NdppLayerConfig c = conv_cfg();
  const Tensor x = ar1_batch_2d(16, 2, 5, 0.6, 20);
  std::vector<LocalMoments> local;
  for (const auto& s : shard_batch(x, 8)) local.push_back(local_moments(s, c));
  const auto ref = allreduce_moments(local);
  std::mt19937 rng(3);
  for (int trial = 0; trial < 5; ++trial) {
    std::shuffle(local.begin(), local.end(), rng);
    const auto agg = allreduce_moments(local);
    for (std::size_t b = 0; b < agg.gram.size(); ++b) EXPECT_EQ(agg.gram[b].values(), ref.gram[b].values());
  }
}

TEST(Allreduce, ShapeMismatchRejected) {
  auto a = local_moments({0, ar1_batch_2d(2, 2, 5, 0.5, 1)}, conv_cfg());
  NdppLayerConfig other = conv_cfg();
  other.block_size = 0;
  auto b = local_moments({1, ar1_batch_2d(2, 2, 5, 0.5, 2)}, other);
  EXPECT_THROW(allreduce_moments({a, b}), ContractError);
  EXPECT_THROW(allreduce_moments({}), ContractError);
  EXPECT_THROW(allreduce_moments({a, a}), ContractError);
}

TEST(Allreduce, SmallPerWorkerBatchIsDefinite) {
  NdppLayerConfig c;
  c.in_channels = 6;
  c.out_channels = 2;
  const Tensor x = gaussian({16, 6}, 4);
  std::vector<LocalMoments> local;
  for (const auto& s : shard_batch(x, 8)) {
    ASSERT_EQ(s.batch.dim(0), 2u);
    local.push_back(local_moments(s, c));
  }
  for (const Tensor& r : allreduce_moments(local).regularized(c.epsilon)) {
    EXPECT_GT(jacobi_eigen(r).values.front(), 0.0);
  }
  // Each worker alone is rank-deficient; regularisation still makes it SPD.
  for (const Tensor& r : allreduce_moments({local[0]}).regularized(c.epsilon)) {
    EXPECT_GT(jacobi_eigen(r).values.front(), 0.0);
  }
}

TEST(SynchronizedCovariances, GraphPathMatchesSingleWorker) {
  const NdppLayerConfig c = conv_cfg();
  const Var xs = scale_standardize(Var::constant(ar1_batch_2d(9, 2, 6, 0.7, 8)), c.scale_mode);
  const auto one = synchronized_covariances(xs, c, 1);
  for (std::size_t k : {2, 3, 9}) {
    const auto many = synchronized_covariances(xs, c, k);
    for (std::size_t b = 0; b < one.size(); ++b) EXPECT_LT(max_abs_diff(many[b].value(), one[b].value()), 1e-12);
  }
}

}  // namespace
}  // namespace ndpp
