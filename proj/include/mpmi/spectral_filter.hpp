#pragma once

#include <cstddef>

#include "mpmi/generalized_root.hpp"
#include "mpmi/matrix.hpp"
#include "mpmi/solve_report.hpp"
#include "mpmi/svd.hpp"

namespace mpmi {

/// Right end of the quartic's parameter range: (3/2)^4 - (3/2)^3.
inline constexpr double kQuarticMaxParameter = 27.0 / 16.0;
/// Largest inflation factor a singular value can receive.
inline constexpr double kMaxInflation = 1.5;

/// y = x - 1 where x in [1, 3/2] solves x^4 - x^3 = t, i.e. y (1 + y)^3 = t.
/// Working with the excess keeps full relative accuracy as t -> 0.
double quartic_excess(double t);

/// Unique x in [1, 3/2] with x^4 - x^3 = t, for t in [0, 27/16].
double solve_quartic_monotone(double t);

/// lambda_k = (27/16) rho^4: past this level the singular value is annihilated.
double mpm_breakpoint(double rho);

/// rho * x(lambda / rho^4) for 0 < lambda <= lambda_k, rho at lambda = 0 and 0
/// beyond lambda_k. At lambda == lambda_k the nonzero branch (3/2) rho is taken.
double mpm_filtered_value(double rho, double lambda);

/// beta(lambda) = sum over rho_k > 0 of (rho_k(lambda) - rho_k)^2.
double mpm_beta(double lambda, const Vector& sigma, Side side = Side::left);

/// Generalized root of beta(lambda) = h^2. Throws EnergyExceededError when
/// h^2 >= sum rho_k^2.
GeneralizedRoot mpm_solve_lambda(double h, const Vector& sigma);

struct MpmSpectrum {
  Vector sigma;           // original singular values
  Vector lambda_breaks;   // (27/16) sigma_k^4, zero where sigma_k == 0
  double lambda_chosen = 0.0;
  bool jump = false;
  Vector filtered_sigma;  // sigma_k(lambda_chosen)

  /// Number of nonzero filtered values.
  std::size_t rank() const noexcept;
};

/// Steps 2-4 of the minimal pseudoinverse construction on precomputed factors.
MpmSpectrum mpm_spectrum(const SvdFactors& f, double h);

struct MpmResult {
  DenseMatrix pinv;    // minimal pseudoinverse, n x m
  DenseMatrix approx;  // the matrix it inverts, m x n
  MpmSpectrum spectrum;
  double distance = 0.0;  // |approx - a_h|_F, equal to sqrt(beta(lambda_chosen))
};

/// Minimal pseudoinverse of a_h over the ball of radius h (Frobenius) around it.
MpmResult mpm_pseudoinverse(const DenseMatrix& a_h, double h);
MpmResult mpm_pseudoinverse(const SvdFactors& f, double h);

/// z = A~_h^+ u with A~_h the minimal-pseudoinverse matrix of the given
/// factors; the chosen parameter is lambda(h).
SolveReport mpm_solve(const SvdFactors& f, const Vector& u, double h);

}  // namespace mpmi
