#pragma once

#include <cstddef>
#include <vector>

#include "mpmi/generalized_root.hpp"
#include "mpmi/matrix.hpp"
#include "mpmi/solve_report.hpp"
#include "mpmi/svd.hpp"

namespace mpmi {

/// Inflation functions x_k(h), k < size(), applied to the leading singular
/// values of an exact matrix.
///
/// Contract for implementations:
///   - x_k(0) = 1 and 1 < x_k(h) <= bound(k) on (0, breakpoint(k)];
///   - x_k is continuous on [0, breakpoint(k)] and x_k(h) = 0 past it;
///   - 1 / x_k(h) is nonincreasing on [0, breakpoint(k)].
/// Under this contract the discrepancy is left-continuous with jumps only at
/// the breakpoints, which is what the root search relies on.
class FilterFamily {
public:
  virtual ~FilterFamily() = default;

  virtual std::size_t size() const noexcept = 0;
  virtual double breakpoint(std::size_t k) const = 0;
  virtual double bound(std::size_t k) const = 0;
  /// a_k in x_k(h) ~ 1 + a_k h as h -> 0.
  virtual double slope(std::size_t k) const = 0;
  /// x_k(h) - 1 for 0 <= h <= breakpoint(k).
  virtual double excess(std::size_t k, double h) const = 0;

  /// Any level past which every x_k vanishes; twice the largest breakpoint.
  double cap() const;

  double x(std::size_t k, double h) const;

  /// 1 - theta[x_k(h)], the fraction of v_k left in the residual. At a
  /// breakpoint `Side::right` gives the annihilated value 1.
  double residual_factor(std::size_t k, double h, Side side = Side::left) const;
};

/// x_k(h) solving x^4 - x^3 = h / rho_k^4 on [1, 3/2], zero past
/// h_k = (27/16) rho_k^4.
class MpmiFamily final : public FilterFamily {
public:
  /// `leading_sigma` must be positive (the nonzero part of the exact spectrum).
  explicit MpmiFamily(Vector leading_sigma);

  std::size_t size() const noexcept override { return static_cast<std::size_t>(sigma_.size()); }
  double breakpoint(std::size_t k) const override;
  double bound(std::size_t k) const override;
  double slope(std::size_t k) const override;
  double excess(std::size_t k, double h) const override;

private:
  Vector sigma_;
};

/// Family over the numerically nonzero singular values of `f`.
MpmiFamily mpmi_family(const SvdFactors& f);

double mpmi_x(double rho, double h);

/// |A A^+ u - u|, computed from the components of U^T u past the numerical rank.
double mu_delta(const SvdFactors& f, const Vector& u_delta);

/// beta_delta^2(h) = sum_{k < rank} (1 - theta[x_k(h)])^2 v_k^2 + mu_delta^2,
/// with v = U^T u_delta.
double beta_delta_sq(double h, const SvdFactors& f, const Vector& v, const FilterFamily& family,
                     Side side = Side::left);

struct DiscrepancyCurve {
  struct Sample {
    double h = 0.0;
    double beta_sq = 0.0;
  };
  struct Jump {
    double h = 0.0;
    double left = 0.0;   // beta^2(h - 0) = beta^2(h)
    double right = 0.0;  // beta^2(h + 0)
  };

  std::vector<Sample> samples;  // h = 0 followed by a log-spaced grid up to cap()
  std::vector<Jump> jumps;      // one per distinct breakpoint, ascending
  double mu_delta_sq = 0.0;
  double u_norm_sq = 0.0;
};

DiscrepancyCurve discrepancy_curve(const SvdFactors& f, const Vector& v, const FilterFamily& family,
                                   std::size_t sample_count);

struct HDeltaSolution {
  double h = 0.0;
  bool jump = false;
  double target = 0.0;  // delta^2 + mu_delta^2
  DiscrepancyCurve curve;
};

/// Generalized root of beta_delta^2(h) = delta_abs^2 + mu_delta^2. Throws
/// NoiseDominatesError when the target is not below |u_delta|^2. The curve is
/// sampled only when `curve_samples > 0`.
HDeltaSolution solve_h_delta(const SvdFactors& f, const Vector& u_delta, double delta_abs,
                             const FilterFamily& family, std::size_t curve_samples = 0);

/// Length-min(m, n) spectrum rho_k x_k(h), zero past the family.
Vector filtered_spectrum(const SvdFactors& f, const FilterFamily& family, double h);

/// Largest over smallest nonzero filtered singular value.
double condition_number_filtered(const SvdFactors& f, const FilterFamily& family, double h);

SolveReport mpmi_solve(const SvdFactors& f, const Vector& u_delta, double delta_abs);
SolveReport mpmi_solve(const DenseMatrix& a_bar, const Vector& u_delta, double delta_abs);

}  // namespace mpmi
