#include "ndpp/syncsim.hpp"

#include <algorithm>
#include <string>

#include "ndpp/errors.hpp"
#include "ndpp/matfun.hpp"
#include "ndpp/scale.hpp"

namespace ndpp {

namespace {

struct RowRange {
  std::size_t begin = 0;
  std::size_t end = 0;
};

std::vector<RowRange> split_rows(std::size_t n, std::size_t workers) {
  if (workers == 0) throw ContractError("need at least one worker");
  if (workers > n) {
    throw ContractError("cannot shard " + std::to_string(n) + " samples over " + std::to_string(workers) + " workers");
  }
  std::vector<RowRange> out;
  out.reserve(workers);
  const std::size_t base = n / workers;
  const std::size_t extra = n % workers;
  std::size_t at = 0;
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t len = base + (w < extra ? 1 : 0);
    out.push_back({at, at + len});
    at += len;
  }
  return out;
}

Shape with_rows(Shape s, std::size_t rows) {
  s[0] = rows;
  return s;
}

// Axis-0 slice of a tensor of any rank, through the 2-d row slice.
Var slice_samples(const Var& x, std::size_t begin, std::size_t end) {
  const Shape& s = x.shape();
  if (s.size() == 2) return slice_rows(x, begin, end);
  const std::size_t per = shape_size(s) / s[0];
  Var flat = reshape(x, {s[0], per});
  return reshape(slice_rows(flat, begin, end), with_rows(s, end - begin));
}

std::vector<Var> block_grams(const Var& data, const std::vector<ColumnRange>& blocks) {
  std::vector<Var> out;
  out.reserve(blocks.size());
  for (const ColumnRange& b : blocks) {
    out.push_back(gram(blocks.size() == 1 ? data : slice_cols(data, b.begin, b.end)));
  }
  return out;
}

}  // namespace

std::vector<WorkerShard> shard_batch(const Tensor& x, std::size_t workers) {
  if (x.rank() < 2) throw DimensionError("shard_batch expects samples along axis 0 of a rank >= 2 tensor");
  const auto ranges = split_rows(x.dim(0), workers);
  std::vector<WorkerShard> out;
  out.reserve(ranges.size());
  const Var whole = Var::constant(x);
  for (std::size_t w = 0; w < ranges.size(); ++w) {
    out.push_back({w, slice_samples(whole, ranges[w].begin, ranges[w].end).value()});
  }
  return out;
}

LocalMoments local_moments(const WorkerShard& shard, const NdppLayerConfig& config) {
  config.validate();
  if (shard.batch.empty() || shard.batch.dim(0) == 0) throw ContractError("local_moments: empty shard");
  const Var xs = scale_standardize(Var::constant(shard.batch), config.scale_mode);
  const Var data = covariance_data_matrix(xs, config);
  LocalMoments out;
  out.worker_id = shard.worker_id;
  out.rows = data.value().rows();
  for (const Var& g : block_grams(data, config.blocks())) out.gram.push_back(g.value());
  return out;
}

AggregatedMoments allreduce_moments(std::vector<LocalMoments> moments) {
  if (moments.empty()) throw ContractError("allreduce_moments: no worker contributions");
  std::sort(moments.begin(), moments.end(),
            [](const LocalMoments& a, const LocalMoments& b) { return a.worker_id < b.worker_id; });
  for (std::size_t i = 1; i < moments.size(); ++i) {
    if (moments[i].worker_id == moments[i - 1].worker_id) {
      throw ContractError("allreduce_moments: duplicate worker id " + std::to_string(moments[i].worker_id));
    }
  }
  AggregatedMoments out;
  out.gram = moments.front().gram;
  out.rows = moments.front().rows;
  for (std::size_t i = 1; i < moments.size(); ++i) {
    const LocalMoments& m = moments[i];
    if (m.gram.size() != out.gram.size()) throw ContractError("allreduce_moments: block counts differ between workers");
    for (std::size_t b = 0; b < out.gram.size(); ++b) {
      if (m.gram[b].shape() != out.gram[b].shape()) {
        throw ContractError("allreduce_moments: block " + std::to_string(b) + " has shape " +
                            to_string(m.gram[b].shape()) + " on worker " + std::to_string(m.worker_id) +
                            ", expected " + to_string(out.gram[b].shape()));
      }
      out.gram[b] = add(out.gram[b], m.gram[b]);
    }
    out.rows += m.rows;
  }
  if (out.rows == 0) throw ContractError("allreduce_moments: zero total rows");
  return out;
}

std::vector<Tensor> AggregatedMoments::covariances() const {
  if (rows == 0) throw ContractError("aggregated moments hold no rows");
  std::vector<Tensor> out;
  out.reserve(gram.size());
  for (const Tensor& g : gram) out.push_back(scale(g, 1.0 / static_cast<double>(rows)));
  return out;
}

std::vector<Tensor> AggregatedMoments::regularized(double epsilon) const {
  std::vector<Tensor> out = covariances();
  for (Tensor& c : out) c = regularize(c, epsilon);
  return out;
}

std::vector<Var> synchronized_covariances(const Var& standardized, const NdppLayerConfig& config,
                                          std::size_t workers) {
  const auto blocks = config.blocks();
  if (workers <= 1) {
    const Var data = covariance_data_matrix(standardized, config);
    const double inv_n = 1.0 / static_cast<double>(data.value().rows());
    std::vector<Var> out = block_grams(data, blocks);
    for (Var& g : out) g = scale(g, inv_n);
    return out;
  }
  const auto ranges = split_rows(standardized.shape()[0], workers);
  // Each worker's moments are built independently; the sum below runs in
  // worker order so the result does not depend on scheduling.
  std::vector<std::vector<Var>> local(ranges.size());
  std::vector<std::size_t> rows(ranges.size());
  for (std::size_t w = 0; w < ranges.size(); ++w) {
    const Var data = covariance_data_matrix(slice_samples(standardized, ranges[w].begin, ranges[w].end), config);
    rows[w] = data.value().rows();
    local[w] = block_grams(data, blocks);
  }
  std::size_t total = 0;
  for (std::size_t r : rows) total += r;
  std::vector<Var> out = local[0];
  for (std::size_t w = 1; w < local.size(); ++w) {
    for (std::size_t b = 0; b < out.size(); ++b) out[b] = add(out[b], local[w][b]);
  }
  for (Var& g : out) g = scale(g, 1.0 / static_cast<double>(total));
  return out;
}

}  // namespace ndpp
