#include "ndpp/ndpp_layer.hpp"

#include <cmath>
#include <random>
#include <string>

#include "ndpp/errors.hpp"
#include "ndpp/parallel.hpp"
#include "ndpp/scale.hpp"
#include "ndpp/syncsim.hpp"

namespace ndpp {

namespace {

Tensor uniform_init(Shape shape, std::size_t fan_in, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const double bound = std::sqrt(1.0 / static_cast<double>(fan_in));
  std::uniform_real_distribution<double> dist(-bound, bound);
  Tensor t(std::move(shape), 0.0);
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = dist(rng);
  return t;
}

}  // namespace

Var fuse_weight(std::span<const Var> d, std::span<const ColumnRange> blocks, const Var& w) {
  if (d.size() != blocks.size()) throw ContractError("fuse_weight: one D per block required");
  if (blocks.size() == 1) return matmul(d[0], w);
  std::vector<Var> parts;
  parts.reserve(blocks.size());
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    parts.push_back(matmul(d[b], slice_rows(w, blocks[b].begin, blocks[b].end)));
  }
  return vstack(parts);
}

NdppLayer::NdppLayer(NdppLayerConfig config, std::uint64_t seed) : config_(std::move(config)) {
  config_.validate();
  const std::size_t d = config_.data_columns();
  weight_ = Var::leaf(uniform_init({d, config_.out_channels}, d, seed));
  if (config_.bias && config_.layer_kind != LayerKind::fully_connected) {
    bias_ = Var::leaf(Tensor({1, config_.out_channels}, 0.0));
  }
  state_.blocks = config_.blocks();
}

std::vector<Var*> NdppLayer::parameters() {
  std::vector<Var*> out{&weight_};
  if (bias_.defined()) out.push_back(&bias_);
  return out;
}

void NdppLayer::set_weight(const Tensor& w) {
  if (w.shape() != weight_.shape()) {
    throw DimensionError("weight must be " + to_string(weight_.shape()) + ", got " + to_string(w.shape()));
  }
  weight_ = Var::leaf(w);
}

void NdppLayer::set_weight(const Var& w) {
  if (w.shape() != weight_.shape()) {
    throw DimensionError("weight must be " + to_string(weight_.shape()) + ", got " + to_string(w.shape()));
  }
  weight_ = w;
}

void NdppLayer::set_bias(const Tensor& b) {
  if (!bias_.defined()) throw ContractError("this layer has no separate bias");
  if (b.shape() != bias_.shape()) {
    throw DimensionError("bias must be " + to_string(bias_.shape()) + ", got " + to_string(b.shape()));
  }
  bias_ = Var::leaf(b);
}

void NdppLayer::set_running_d(std::vector<Tensor> running) {
  if (running.size() != state_.blocks.size()) throw ContractError("running D needs one matrix per block");
  for (std::size_t b = 0; b < running.size(); ++b) {
    const std::size_t n = state_.blocks[b].size();
    if (running[b].shape() != Shape{n, n}) throw DimensionError("running D block has the wrong shape");
  }
  state_.running_d = std::move(running);
  if (state_.fits == 0) state_.fits = 1;
}

void NdppLayer::fit_whitening(const Var& x) {
  if (mode_ != Mode::training) throw ContractError("fit_whitening requires training mode");
  const Var xs = scale_standardize(x, config_.scale_mode);
  std::vector<Var> covs = synchronized_covariances(xs, config_, config_.sync_workers);
  if (covs.size() != state_.blocks.size()) throw ContractError("block layout changed between fits");

  std::vector<Var> d(covs.size());
  std::vector<BlockDiagnostics> diag(covs.size());
  parallel_for(covs.size(), [&](std::size_t b) {
    Var cov = regularize(config_.whitening_in_graph ? covs[b] : covs[b].detached(), config_.epsilon);
    if (config_.whitener == Whitener::eigen) {
      const Tensor db = inverse_sqrt_eigen(cov.value());
      diag[b] = {inverse_sqrt_residual(db, cov.value()), 0, true};
      d[b] = Var::constant(db);
      return;
    }
    InverseSqrtVar r = inverse_sqrt_newton(cov, config_.newton_iterations);
    diag[b] = {r.residual, r.iterations_used, r.converged};
    d[b] = std::move(r.d);
  });

  if (state_.running_d.empty()) {
    for (const Var& db : d) state_.running_d.push_back(db.value());
  } else {
    const double rho = config_.momentum;
    for (std::size_t b = 0; b < d.size(); ++b) {
      state_.running_d[b] = symmetrize(add(scale(state_.running_d[b], rho), scale(d[b].value(), 1.0 - rho)));
    }
  }
  state_.batch_d = std::move(d);
  state_.diagnostics = std::move(diag);
  ++state_.fits;
  fitted_input_ = x;
  fitted_standardized_ = xs;
}

void NdppLayer::ensure_fitted(const Var& x) {
  if (mode_ == Mode::evaluation) {
    if (state_.running_d.empty()) throw ContractError("evaluation before any fit_whitening call");
    return;
  }
  if (!fitted_input_.defined() || fitted_input_.node() != x.node()) fit_whitening(x);
}

std::vector<Var> NdppLayer::active_d() const {
  if (mode_ == Mode::training) return state_.batch_d;
  std::vector<Var> out;
  out.reserve(state_.running_d.size());
  for (const Tensor& t : state_.running_d) out.push_back(Var::constant(t));
  return out;
}

NdppLayer::Prepared NdppLayer::prepare(const Var& x) {
  ensure_fitted(x);
  const Var xs = mode_ == Mode::training ? fitted_standardized_ : scale_standardize(x, config_.scale_mode);
  Prepared p;
  p.data = forward_data_matrix(xs, config_, &p.plan);
  return p;
}

Var NdppLayer::finish(const Var& rows, const WindowPlan& plan) const {
  if (config_.layer_kind == LayerKind::fully_connected) return rows;
  Var y = rows;
  if (bias_.defined()) y = broadcast(y, bias_, BroadcastOp::add);
  return rows_to_channels_first(y, plan);
}

Var NdppLayer::forward(const Var& x) {
  Prepared p = prepare(x);
  const std::vector<Var> d = active_d();
  const Var fused = fuse_weight(d, state_.blocks, weight_);
  return finish(matmul(p.data, fused), p.plan);
}

Var NdppLayer::forward_explicit(const Var& x) {
  Prepared p = prepare(x);
  const std::vector<Var> d = active_d();
  std::vector<Var> parts;
  for (std::size_t b = 0; b < d.size(); ++b) {
    const ColumnRange& r = state_.blocks[b];
    parts.push_back(matmul(d.size() == 1 ? p.data : slice_cols(p.data, r.begin, r.end), d[b]));
  }
  const Var whitened = parts.size() == 1 ? parts[0] : hstack(parts);
  return finish(matmul(whitened, weight_), p.plan);
}

Var NdppLayer::whitened_data_matrix(const Var& x) {
  ensure_fitted(x);
  const Var xs = mode_ == Mode::training ? fitted_standardized_ : scale_standardize(x, config_.scale_mode);
  const Var data = covariance_data_matrix(xs, config_);
  const std::vector<Var> d = active_d();
  std::vector<Var> parts;
  for (std::size_t b = 0; b < d.size(); ++b) {
    const ColumnRange& r = state_.blocks[b];
    parts.push_back(matmul(d.size() == 1 ? data : slice_cols(data, r.begin, r.end), d[b]));
  }
  return parts.size() == 1 ? parts[0] : hstack(parts);
}

}  // namespace ndpp
