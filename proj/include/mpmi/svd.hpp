#pragma once

#include <cstddef>
#include <optional>

#include "mpmi/matrix.hpp"

namespace mpmi {

/// Full SVD A = U diag(sigma) V^T with U (m x m), V (n x n) orthogonal and
/// sigma (length min(m, n)) nonincreasing.
struct SvdFactors {
  Eigen::MatrixXd u;
  Eigen::MatrixXd v;
  Vector sigma;
  double rank_tolerance = 0.0;

  std::size_t rows() const noexcept { return static_cast<std::size_t>(u.rows()); }
  std::size_t cols() const noexcept { return static_cast<std::size_t>(v.rows()); }
  std::size_t min_dim() const noexcept { return static_cast<std::size_t>(sigma.size()); }

  /// Numerical rank: #{k : sigma_k > rank_tolerance}.
  std::size_t rank() const noexcept;

  /// U^T u, the right-hand side in singular coordinates.
  Vector project(const Vector& rhs) const;
};

/// sigma_1 * max(m, n) * machine epsilon.
double default_rank_tolerance(double sigma_max, std::size_t rows, std::size_t cols);

/// Deterministic full SVD. Throws InputError for a zero or non-finite matrix
/// and FactorizationError when the underlying iteration does not converge.
SvdFactors svd(const DenseMatrix& a, std::optional<double> rank_tolerance = std::nullopt);

/// 1/rho for rho > 0, 0 for rho == 0.
double theta(double rho);

/// V diag(theta(filtered_sigma)) U^T rhs, without forming the pseudoinverse.
Vector apply_filtered_pinv(const SvdFactors& f, const Vector& filtered_sigma, const Vector& rhs);

/// Explicit n x m matrix V diag(theta(filtered_sigma)) U^T.
DenseMatrix filtered_pinv_matrix(const SvdFactors& f, const Vector& filtered_sigma);

/// Explicit m x n matrix U diag(filtered_sigma) V^T.
DenseMatrix filtered_matrix(const SvdFactors& f, const Vector& filtered_sigma);

/// Relative residuals of the four Moore-Penrose identities for a candidate X = A^+.
struct PinvCheckReport {
  double axa_minus_a = 0.0;   // |AXA - A| / |A|
  double xax_minus_x = 0.0;   // |XAX - X| / |X|
  double ax_symmetric = 0.0;  // |(AX)^T - AX| / (|A||X|)
  double xa_symmetric = 0.0;  // |(XA)^T - XA| / (|A||X|)

  double max() const noexcept;
};

PinvCheckReport moore_penrose_check(const DenseMatrix& a, const DenseMatrix& a_plus);

/// sigma_1 / sigma_r with r the numerical rank. Throws UndefinedConditionError
/// when the rank is zero.
double spectral_cond(const SvdFactors& f);

}  // namespace mpmi
