#ifndef NDPP_SYNCSIM_HPP
#define NDPP_SYNCSIM_HPP

#include <cstddef>
#include <vector>

#include "ndpp/autodiff.hpp"
#include "ndpp/layer_config.hpp"
#include "ndpp/tensor.hpp"

namespace ndpp {

// In-process simulation of statistic synchronisation across data-parallel
// workers. Workers exchange unnormalised moments X^T X and row counts, never
// covariances, so shards of unequal size aggregate exactly.

struct WorkerShard {
  std::size_t worker_id = 0;
  Tensor batch;  // contiguous slice of the global batch along axis 0
};

/// Contiguous split along axis 0; the first N mod K workers get one extra
/// sample. Throws ContractError when K is zero or exceeds N.
std::vector<WorkerShard> shard_batch(const Tensor& x, std::size_t workers);

struct LocalMoments {
  std::size_t worker_id = 0;
  std::vector<Tensor> gram;  // one X^T X per block
  std::size_t rows = 0;      // data-matrix rows behind the sums
};

/// Scale-standardises the shard and builds its covariance data matrix
/// exactly as a single-worker fit would, then sums per block.
LocalMoments local_moments(const WorkerShard& shard, const NdppLayerConfig& config);

struct AggregatedMoments {
  std::vector<Tensor> gram;
  std::size_t rows = 0;

  /// Sum X^T X / sum N per block.
  std::vector<Tensor> covariances() const;
  /// covariances() followed by regularize(., epsilon).
  std::vector<Tensor> regularized(double epsilon) const;
};

/// Sums moments in ascending worker_id order, whatever order they arrive in.
/// Throws ContractError on an empty list, duplicate ids or block shapes that
/// disagree between workers.
AggregatedMoments allreduce_moments(std::vector<LocalMoments> moments);

/// Differentiable per-block covariances of an already standardised batch,
/// computed by sharding it over `workers` simulated workers and aggregating
/// moments. workers == 1 reduces to covariance() of each column block.
std::vector<Var> synchronized_covariances(const Var& standardized, const NdppLayerConfig& config,
                                          std::size_t workers);

}  // namespace ndpp

#endif  // NDPP_SYNCSIM_HPP
