#pragma once

#include <cstddef>

#include "mpmi/matrix.hpp"
#include "mpmi/solve_report.hpp"
#include "mpmi/svd.hpp"

namespace mpmi {

/// Which residual level the discrepancy principle aims at.
enum class DiscrepancyTarget {
  with_mu,   // delta^2 + mu_delta^2 (default; solvable for rank-deficient systems)
  absolute,  // delta^2
};

/// Smallest r with sum_{k > r} v_k^2 <= mu_delta^2 + delta_abs^2, v = U^T u.
/// Throws NoiseDominatesError when even r = 0 satisfies it.
std::size_t tsvd_rank_by_discrepancy(const SvdFactors& f, const Vector& u_delta, double delta_abs);

/// Minimum-rank truncation within distance h: the kappa with
/// |sigma_{kappa+1..M}| <= h < |sigma_{kappa..M}|. Throws ZeroRankError when
/// h >= |sigma|.
std::size_t tsvd_rank_by_matrix_error(const Vector& sigma, double h);

SolveReport tsvd_solve(const SvdFactors& f, const Vector& u_delta, std::size_t rank);

struct TikhonovSpectrum {
  double alpha = 0.0;
  Vector filter;  // rho_k / (alpha + rho_k^2), k below the numerical rank
  double cond = 0.0;
};

struct MorozovSpectrum {
  double alpha = 0.0;
  Vector filter;  // rho_k^3 / (alpha + rho_k^2)^2
  double cond = 0.0;
};

TikhonovSpectrum tikhonov_spectrum(const SvdFactors& f, double alpha);
MorozovSpectrum morozov_spectrum(const SvdFactors& f, double alpha);

SolveReport tikhonov_solve(const SvdFactors& f, const Vector& u_delta, double alpha);
SolveReport morozov_variant_solve(const SvdFactors& f, const Vector& u_delta, double alpha);

/// |A z_alpha - u|^2 in spectral form for TR or Morozov.
double regularized_residual_sq(const SvdFactors& f, const Vector& u_delta, double alpha,
                               Method method);

/// Discrepancy-principle alpha by bisection on log(alpha) over
/// [eps rho_1^2, 1e6 rho_1^2]. `method` must be Method::tr or Method::morozov.
double discrepancy_alpha(const SvdFactors& f, const Vector& u_delta, double delta_abs,
                         Method method, DiscrepancyTarget target = DiscrepancyTarget::with_mu);

}  // namespace mpmi
