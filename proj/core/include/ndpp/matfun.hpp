#ifndef NDPP_MATFUN_HPP
#define NDPP_MATFUN_HPP

#include <cstddef>
#include <vector>

#include "ndpp/autodiff.hpp"
#include "ndpp/tensor.hpp"

namespace ndpp {

enum class LayerKind { fully_connected, convolution, correlation };

const char* to_string(LayerKind kind);

/// Half-open column interval [begin, end).
struct ColumnRange {
  std::size_t begin = 0;
  std::size_t end = 0;

  std::size_t size() const noexcept { return end - begin; }
  friend bool operator==(const ColumnRange&, const ColumnRange&) = default;
};

/// Maximum block width used for block decorrelation. Fully-connected layers
/// use `fc_block_size` columns; convolution/correlation layers use
/// `conv_channels_per_block * k * k`, so one block spans that many whole
/// channels. A non-zero `fixed_block_size` overrides both.
struct BlockPolicy {
  std::size_t fc_block_size = 256;
  std::size_t conv_channels_per_block = 64;
  std::size_t fixed_block_size = 0;

  std::size_t block_size(LayerKind kind, std::size_t kernel) const;
};

/// Contiguous ranges covering [0, d), each at most one block wide; the last
/// range holds the remainder.
std::vector<ColumnRange> partition_columns(std::size_t d, LayerKind kind, std::size_t kernel,
                                           const BlockPolicy& policy = {});

/// Unnormalised second moments X^T X, symmetrised.
Tensor gram(const Tensor& x);
Var gram(const Var& x);

/// Cov = (1/N) X^T X, symmetrised as (M + M^T) / 2.
Tensor covariance(const Tensor& x);
Var covariance(const Var& x);

/// cov + epsilon * mean(diag(cov)) * I. Falls back to an absolute epsilon
/// when the mean diagonal is zero.
Tensor regularize(const Tensor& cov, double epsilon);
Var regularize(const Var& cov, double epsilon);

struct InverseSqrtResult {
  Tensor d;
  int iterations_used = 0;
  /// ||D Cov D - I||_F / sqrt(B)
  double residual = 0.0;
  /// false when the final residual exceeds kNewtonFailureResidual.
  bool converged = true;
  /// residual after 0, 1, ..., iterations_used steps (only when requested).
  std::vector<double> residual_history;
};

inline constexpr double kNewtonFailureResidual = 0.5;

/// Scale factor tau applied as M0 = Cov / tau before the coupled iteration:
/// tau = max(trace/B, min(||Cov||_F, ||Cov||_inf) / 2). Both norms bound the
/// largest eigenvalue, so the scaled spectrum stays inside (0, 2], within the
/// (0, 3) region where the iteration converges; for a near-isotropic
/// spectrum the trace term keeps it centred on one.
double newton_prescale(const Tensor& cov);

/// Principal inverse square root by the coupled inverse Newton iteration
///   X_{k+1} = X_k (3I - M_k) / 2,   M_{k+1} = ((3I - M_k) / 2)^2 M_k,
/// started from X_0 = I, M_0 = Cov / tau, and rescaled by 1/sqrt(tau).
/// Throws NumericError on non-finite input; a residual above
/// kNewtonFailureResidual only clears `converged`.
InverseSqrtResult inverse_sqrt_newton(const Tensor& cov, int iterations = 5, bool record_history = false);

struct InverseSqrtVar {
  Var d;
  int iterations_used = 0;
  double residual = 0.0;
  bool converged = true;
};

/// Same iteration recorded in the differentiation graph (tau included).
InverseSqrtVar inverse_sqrt_newton(const Var& cov, int iterations = 5);

double inverse_sqrt_residual(const Tensor& d, const Tensor& cov);

struct EigenDecomposition {
  std::vector<double> values;  // ascending
  Tensor vectors;              // column j pairs with values[j]
  int sweeps = 0;
  double off_diagonal = 0.0;   // final off-diagonal Frobenius norm
};

/// Cyclic Jacobi rotations; stops when the off-diagonal norm falls below
/// tolerance * ||a||_F or after max_sweeps sweeps.
EigenDecomposition jacobi_eigen(const Tensor& a, double tolerance = 1e-12, int max_sweeps = 100);

/// V diag(lambda^-1/2) V^T. Throws ContractError when any eigenvalue <= 0.
Tensor inverse_sqrt_eigen(const Tensor& cov);

/// V diag(1/lambda) V^T for SPD input. Throws ContractError when singular.
Tensor inverse_spd(const Tensor& a);

}  // namespace ndpp

#endif  // NDPP_MATFUN_HPP
