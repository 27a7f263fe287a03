#include "ndpp/matfun.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace ndpp {

namespace {

constexpr double kSpectralTarget = 2.0;

void require_square(const Tensor& a, const char* op) {
  if (a.rank() != 2 || a.dim(0) != a.dim(1)) {
    throw DimensionError(std::string(op) + ": square matrix required, got " + to_string(a.shape()));
  }
}

void require_data_matrix(const Tensor& x, const char* op) {
  if (x.rank() != 2) throw DimensionError(std::string(op) + ": data matrix must be rank 2");
  if (x.dim(0) == 0) throw ContractError(std::string(op) + ": data matrix has no rows");
}

double inf_norm(const Tensor& a) {
  double best = 0.0;
  for (std::size_t i = 0; i < a.dim(0); ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < a.dim(1); ++j) row += std::abs(a(i, j));
    best = std::max(best, row);
  }
  return best;
}

// Which term of newton_prescale is active; used to route the gradient.
enum class PrescaleBranch { mean_trace, frobenius, inf_norm };

PrescaleBranch prescale_branch(const Tensor& cov, double* tau) {
  const double b = static_cast<double>(cov.dim(0));
  const double by_trace = trace(cov) / b;
  const double fro = frobenius_norm(cov);
  const double inf = inf_norm(cov);
  const double bound = std::min(fro, inf) / kSpectralTarget;
  if (by_trace >= bound) {
    *tau = by_trace;
    return PrescaleBranch::mean_trace;
  }
  *tau = bound;
  return fro <= inf ? PrescaleBranch::frobenius : PrescaleBranch::inf_norm;
}

Var prescale_var(const Var& cov) {
  double tau = 0.0;
  const PrescaleBranch branch = prescale_branch(cov.value(), &tau);
  return make_op(Tensor::scalar(tau), {cov}, [cov, branch, tau](const Tensor& g) {
    const Tensor& c = cov.value();
    const std::size_t n = c.dim(0);
    Tensor grad({n, n});
    switch (branch) {
      case PrescaleBranch::mean_trace:
        for (std::size_t i = 0; i < n; ++i) grad(i, i) = g[0] / static_cast<double>(n);
        break;
      case PrescaleBranch::frobenius: {
        // tau = ||C||_F / t  =>  dtau/dC = C / (t * ||C||_F) = C / (t^2 tau)
        const double denom = kSpectralTarget * kSpectralTarget * tau;
        for (std::size_t i = 0; i < c.size(); ++i) grad[i] = g[0] * c[i] / denom;
        break;
      }
      case PrescaleBranch::inf_norm: {
        std::size_t arg = 0;
        double best = -1.0;
        for (std::size_t i = 0; i < n; ++i) {
          double row = 0.0;
          for (std::size_t j = 0; j < n; ++j) row += std::abs(c(i, j));
          if (row > best) {
            best = row;
            arg = i;
          }
        }
        for (std::size_t j = 0; j < n; ++j) {
          const double v = c(arg, j);
          grad(arg, j) = g[0] * (v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0)) / kSpectralTarget;
        }
        break;
      }
    }
    return std::vector<Tensor>{std::move(grad)};
  });
}

void require_finite(const Tensor& cov) {
  if (!all_finite(cov)) throw NumericError("inverse_sqrt_newton: covariance has non-finite entries");
}

}  // namespace

const char* to_string(LayerKind kind) {
  switch (kind) {
    case LayerKind::fully_connected: return "fully_connected";
    case LayerKind::convolution: return "convolution";
    case LayerKind::correlation: return "correlation";
  }
  return "unknown";
}

std::size_t BlockPolicy::block_size(LayerKind kind, std::size_t kernel) const {
  if (fixed_block_size > 0) return fixed_block_size;
  if (kind == LayerKind::fully_connected) return fc_block_size;
  return conv_channels_per_block * kernel * kernel;
}

std::vector<ColumnRange> partition_columns(std::size_t d, LayerKind kind, std::size_t kernel,
                                           const BlockPolicy& policy) {
  const std::size_t b = std::max<std::size_t>(1, policy.block_size(kind, kernel));
  std::vector<ColumnRange> ranges;
  for (std::size_t begin = 0; begin < d; begin += b) ranges.push_back({begin, std::min(d, begin + b)});
  return ranges;
}

Tensor gram(const Tensor& x) {
  require_data_matrix(x, "gram");
  return symmetrize(matmul_tn(x, x));
}

Var gram(const Var& x) {
  require_data_matrix(x.value(), "gram");
  return symmetrize(matmul_tn(x, x));
}

Tensor covariance(const Tensor& x) {
  require_data_matrix(x, "covariance");
  return scale(gram(x), 1.0 / static_cast<double>(x.dim(0)));
}

Var covariance(const Var& x) {
  require_data_matrix(x.value(), "covariance");
  return scale(gram(x), 1.0 / static_cast<double>(x.value().dim(0)));
}

Tensor regularize(const Tensor& cov, double epsilon) {
  if (epsilon < 0.0) throw ContractError("regularize: epsilon must be non-negative");
  require_square(cov, "regularize");
  const double mean_diag = trace(cov) / static_cast<double>(cov.dim(0));
  const double shift = mean_diag != 0.0 ? epsilon * mean_diag : epsilon;
  Tensor out = cov;
  for (std::size_t i = 0; i < cov.dim(0); ++i) out(i, i) += shift;
  out.apply_precision();
  return out;
}

Var regularize(const Var& cov, double epsilon) {
  if (epsilon < 0.0) throw ContractError("regularize: epsilon must be non-negative");
  require_square(cov.value(), "regularize");
  const double n = static_cast<double>(cov.value().dim(0));
  if (trace(cov.value()) == 0.0) return add_scaled_identity(cov, Var::constant(Tensor::scalar(epsilon)));
  return add_scaled_identity(cov, scale(trace(cov), epsilon / n));
}

double newton_prescale(const Tensor& cov) {
  require_square(cov, "newton_prescale");
  double tau = 0.0;
  prescale_branch(cov, &tau);
  return tau;
}

double inverse_sqrt_residual(const Tensor& d, const Tensor& cov) {
  const std::size_t n = cov.dim(0);
  Tensor e = matmul(matmul(d, cov), d);
  for (std::size_t i = 0; i < n; ++i) e(i, i) -= 1.0;
  return frobenius_norm(e) / std::sqrt(static_cast<double>(n));
}

InverseSqrtResult inverse_sqrt_newton(const Tensor& cov, int iterations, bool record_history) {
  require_square(cov, "inverse_sqrt_newton");
  require_finite(cov);
  if (iterations < 0) throw ContractError("inverse_sqrt_newton: negative iteration count");
  const std::size_t n = cov.dim(0);
  const double tau = newton_prescale(cov);
  if (!(tau > 0.0)) throw NumericError("inverse_sqrt_newton: covariance has no positive scale");
  const double unscale = 1.0 / std::sqrt(tau);

  InverseSqrtResult result;
  Tensor m = scale(cov, 1.0 / tau);
  Tensor x = Tensor::identity(n).cast(cov.dtype());
  if (record_history) result.residual_history.push_back(inverse_sqrt_residual(scale(x, unscale), cov));
  for (int k = 0; k < iterations; ++k) {
    Tensor t = scale(m, -0.5);
    for (std::size_t i = 0; i < n; ++i) t(i, i) += 1.5;
    t.apply_precision();
    x = k == 0 ? t : matmul(x, t);
    m = matmul(matmul(t, t), m);
    if (record_history) result.residual_history.push_back(inverse_sqrt_residual(scale(x, unscale), cov));
  }
  result.d = symmetrize(scale(x, unscale));
  if (!all_finite(result.d)) throw NumericError("inverse_sqrt_newton: iteration produced non-finite values");
  result.iterations_used = iterations;
  result.residual = inverse_sqrt_residual(result.d, cov);
  result.converged = std::isfinite(result.residual) && result.residual <= kNewtonFailureResidual;
  return result;
}

InverseSqrtVar inverse_sqrt_newton(const Var& cov, int iterations) {
  const Tensor& c = cov.value();
  require_square(c, "inverse_sqrt_newton");
  require_finite(c);
  if (iterations < 0) throw ContractError("inverse_sqrt_newton: negative iteration count");
  const std::size_t n = c.dim(0);

  Var tau = prescale_var(cov);
  if (!(tau.value()[0] > 0.0)) throw NumericError("inverse_sqrt_newton: covariance has no positive scale");
  Var m = div(cov, tau);
  Var three_halves = Var::constant(scale(Tensor::identity(n), 1.5).cast(c.dtype()));
  Var x;
  for (int k = 0; k < iterations; ++k) {
    Var t = add(three_halves, scale(m, -0.5));
    x = k == 0 ? t : matmul(x, t);
    m = matmul(matmul(t, t), m);
  }
  if (!x.defined()) x = Var::constant(Tensor::identity(n).cast(c.dtype()));
  Var d = symmetrize(div(x, sqrt(tau)));

  InverseSqrtVar out;
  if (!all_finite(d.value())) throw NumericError("inverse_sqrt_newton: iteration produced non-finite values");
  out.residual = inverse_sqrt_residual(d.value(), c);
  out.converged = std::isfinite(out.residual) && out.residual <= kNewtonFailureResidual;
  out.iterations_used = iterations;
  out.d = std::move(d);
  return out;
}

EigenDecomposition jacobi_eigen(const Tensor& input, double tolerance, int max_sweeps) {
  require_square(input, "jacobi_eigen");
  const std::size_t n = input.dim(0);
  Tensor a = symmetrize(input);
  Tensor v = Tensor::identity(n);
  const double norm = frobenius_norm(a);

  auto off_norm = [&] {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (i != j) s += a(i, j) * a(i, j);
    return std::sqrt(s);
  };

  EigenDecomposition out;
  double off = off_norm();
  int sweep = 0;
  while (sweep < max_sweeps && off > tolerance * norm) {
    ++sweep;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v(k, p), vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
    off = off_norm();
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return a(i, i) < a(j, j); });
  out.values.resize(n);
  out.vectors = Tensor({n, n});
  for (std::size_t j = 0; j < n; ++j) {
    out.values[j] = a(order[j], order[j]);
    for (std::size_t k = 0; k < n; ++k) out.vectors(k, j) = v(k, order[j]);
  }
  out.sweeps = sweep;
  out.off_diagonal = off;
  return out;
}

namespace {

template <typename Fn>
Tensor spectral_map(const EigenDecomposition& eig, Fn fn) {
  const std::size_t n = eig.values.size();
  Tensor scaled = eig.vectors;
  for (std::size_t j = 0; j < n; ++j) {
    const double f = fn(eig.values[j]);
    for (std::size_t k = 0; k < n; ++k) scaled(k, j) *= f;
  }
  return symmetrize(matmul_nt(scaled, eig.vectors));
}

}  // namespace

Tensor inverse_sqrt_eigen(const Tensor& cov) {
  require_square(cov, "inverse_sqrt_eigen");
  if (!all_finite(cov)) throw NumericError("inverse_sqrt_eigen: non-finite entries");
  const EigenDecomposition eig = jacobi_eigen(cov);
  if (eig.values.front() <= 0.0) {
    throw ContractError("inverse_sqrt_eigen: matrix is not positive definite (min eigenvalue " +
                        std::to_string(eig.values.front()) + ")");
  }
  return spectral_map(eig, [](double l) { return 1.0 / std::sqrt(l); });
}

Tensor inverse_spd(const Tensor& a) {
  require_square(a, "inverse_spd");
  const EigenDecomposition eig = jacobi_eigen(a);
  const double largest = std::max(std::abs(eig.values.front()), std::abs(eig.values.back()));
  if (eig.values.front() <= largest * 1e-14) {
    throw ContractError("inverse_spd: matrix is singular or not positive definite");
  }
  return spectral_map(eig, [](double l) { return 1.0 / l; });
}

}  // namespace ndpp
