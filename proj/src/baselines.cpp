#include "mpmi/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "mpmi/errors.hpp"

namespace mpmi {

namespace {

// suffix[r] = sum_{k >= r} w_k^2, accumulated from the end so it is monotone
// in floating point.
std::vector<double> suffix_energy(const Vector& w) {
  std::vector<double> suffix(static_cast<std::size_t>(w.size()) + 1, 0.0);
  for (Eigen::Index k = w.size(); k-- > 0;) {
    suffix[static_cast<std::size_t>(k)] = suffix[static_cast<std::size_t>(k) + 1] + w[k] * w[k];
  }
  return suffix;
}

void require_alpha(double alpha) {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) {
    throw InputError("regularization parameter alpha must be positive");
  }
}

void require_rank(const SvdFactors& f) {
  if (f.rank() == 0) throw InputError("matrix has numerical rank zero");
}

// max / min of a positive sequence.
double spread(const Vector& w) { return w.maxCoeff() / w.minCoeff(); }

SolveReport spectral_report(const SvdFactors& f, const Vector& u_delta, const Vector& filter,
                            Method method) {
  const Vector v = f.project(u_delta);
  const auto r = filter.size();
  Vector coeffs = v.head(r).cwiseProduct(filter);
  SolveReport rep;
  rep.method = method;
  rep.solution = f.v.leftCols(r) * coeffs;
  rep.numerical_rank = f.rank();
  rep.mu_delta = std::sqrt(v.tail(v.size() - static_cast<Eigen::Index>(f.rank())).squaredNorm());
  return rep;
}

}  // namespace

std::size_t tsvd_rank_by_discrepancy(const SvdFactors& f, const Vector& u_delta, double delta_abs) {
  require_finite(u_delta, "right-hand side");
  if (!(delta_abs > 0.0)) throw InputError("noise level must be positive");
  const Vector v = f.project(u_delta);
  const std::vector<double> tail = suffix_energy(v);
  const std::size_t rbar = f.rank();
  const double target = delta_abs * delta_abs + tail[rbar];
  if (tail[0] <= target) {
    throw NoiseDominatesError("delta^2 + mu^2 = " + std::to_string(target) +
                              " is not below |u|^2 = " + std::to_string(tail[0]));
  }
  std::size_t r = 1;
  while (r < rbar && tail[r] > target) ++r;
  return r;
}

std::size_t tsvd_rank_by_matrix_error(const Vector& sigma, double h) {
  require_finite(sigma, "singular values");
  if (!(h > 0.0)) throw InputError("matrix error level h must be positive");
  const std::vector<double> tail = suffix_energy(sigma);
  const double h2 = h * h;
  if (tail[0] <= h2) {
    throw ZeroRankError("h = " + std::to_string(h) + " covers the whole spectrum");
  }
  std::size_t kappa = 1;
  while (tail[kappa] > h2) ++kappa;
  return kappa;
}

SolveReport tsvd_solve(const SvdFactors& f, const Vector& u_delta, std::size_t rank) {
  require_finite(u_delta, "right-hand side");
  if (rank == 0) throw ZeroRankError("TSVD rank must be at least 1");
  if (rank > f.rank()) {
    throw InputError("TSVD rank " + std::to_string(rank) + " exceeds the numerical rank " +
                     std::to_string(f.rank()));
  }
  const auto r = static_cast<Eigen::Index>(rank);
  const Vector filter = f.sigma.head(r).cwiseInverse();
  SolveReport rep = spectral_report(f, u_delta, filter, Method::tsvd);
  const Vector v = f.project(u_delta);
  rep.chosen_parameter = static_cast<double>(rank);
  rep.effective_rank = rank;
  rep.condition_number = f.sigma[0] / f.sigma[r - 1];
  rep.residual = std::sqrt(v.tail(v.size() - r).squaredNorm());
  return rep;
}

TikhonovSpectrum tikhonov_spectrum(const SvdFactors& f, double alpha) {
  require_alpha(alpha);
  require_rank(f);
  const Vector rho = f.sigma.head(static_cast<Eigen::Index>(f.rank()));
  const Vector denom = (rho.array().square() + alpha).matrix();
  TikhonovSpectrum s;
  s.alpha = alpha;
  s.filter = rho.cwiseQuotient(denom);
  s.cond = spread(denom.cwiseQuotient(rho));
  return s;
}

MorozovSpectrum morozov_spectrum(const SvdFactors& f, double alpha) {
  require_alpha(alpha);
  require_rank(f);
  const Vector rho = f.sigma.head(static_cast<Eigen::Index>(f.rank()));
  const Vector denom = (rho.array().square() + alpha).square().matrix();
  const Vector rho3 = rho.array().cube().matrix();
  MorozovSpectrum s;
  s.alpha = alpha;
  s.filter = rho3.cwiseQuotient(denom);
  s.cond = spread(denom.cwiseQuotient(rho3));
  return s;
}

SolveReport tikhonov_solve(const SvdFactors& f, const Vector& u_delta, double alpha) {
  require_finite(u_delta, "right-hand side");
  const TikhonovSpectrum s = tikhonov_spectrum(f, alpha);
  SolveReport rep = spectral_report(f, u_delta, s.filter, Method::tr);
  rep.chosen_parameter = alpha;
  rep.effective_rank = f.rank();
  rep.condition_number = s.cond;
  rep.residual = std::sqrt(regularized_residual_sq(f, u_delta, alpha, Method::tr));
  return rep;
}

SolveReport morozov_variant_solve(const SvdFactors& f, const Vector& u_delta, double alpha) {
  require_finite(u_delta, "right-hand side");
  const MorozovSpectrum s = morozov_spectrum(f, alpha);
  SolveReport rep = spectral_report(f, u_delta, s.filter, Method::morozov);
  rep.chosen_parameter = alpha;
  rep.effective_rank = f.rank();
  rep.condition_number = s.cond;
  rep.residual = std::sqrt(regularized_residual_sq(f, u_delta, alpha, Method::morozov));
  return rep;
}

double regularized_residual_sq(const SvdFactors& f, const Vector& u_delta, double alpha,
                               Method method) {
  require_alpha(alpha);
  const Vector v = f.project(u_delta);
  const auto rbar = static_cast<Eigen::Index>(f.rank());
  double sum = v.tail(v.size() - rbar).squaredNorm();
  for (Eigen::Index k = 0; k < rbar; ++k) {
    const double r2 = f.sigma[k] * f.sigma[k];
    const double d = alpha + r2;
    double q = 0.0;
    switch (method) {
      case Method::tr: q = alpha / d; break;
      // 1 - rho^4 / (alpha + rho^2)^2 without cancellation
      case Method::morozov: q = alpha * (alpha + 2.0 * r2) / (d * d); break;
      default: throw InputError("residual form exists only for tr and morozov");
    }
    sum += q * q * v[k] * v[k];
  }
  return sum;
}

double discrepancy_alpha(const SvdFactors& f, const Vector& u_delta, double delta_abs,
                         Method method, DiscrepancyTarget target_kind) {
  require_finite(u_delta, "right-hand side");
  require_rank(f);
  if (method != Method::tr && method != Method::morozov) {
    throw InputError("discrepancy_alpha supports tr and morozov only");
  }
  if (!(delta_abs > 0.0)) throw InputError("noise level must be positive");

  const Vector v = f.project(u_delta);
  const double u2 = v.squaredNorm();
  const double mu2 = v.tail(v.size() - static_cast<Eigen::Index>(f.rank())).squaredNorm();
  const double target =
      delta_abs * delta_abs + (target_kind == DiscrepancyTarget::with_mu ? mu2 : 0.0);
  if (target >= u2) {
    throw NoiseDominatesError("discrepancy target " + std::to_string(target) +
                              " is not below |u|^2 = " + std::to_string(u2));
  }

  const double scale = f.sigma[0] * f.sigma[0];
  double lo = std::log(std::numeric_limits<double>::epsilon() * scale);
  double hi = std::log(1e6 * scale);
  const auto excess = [&](double log_alpha) {
    return regularized_residual_sq(f, u_delta, std::exp(log_alpha), method) - target;
  };
  const double f_lo = excess(lo);
  const double f_hi = excess(hi);
  if (f_lo > 0.0 || f_hi < 0.0) {
    throw BracketExhaustedError("no discrepancy root in [eps rho_1^2, 1e6 rho_1^2]",
                                f_lo + target, f_hi + target);
  }
  const double tol = 1e-10 * u2;
  double best = f_lo <= -f_hi ? lo : hi;
  double best_err = std::min(-f_lo, f_hi);
  for (int iter = 0; iter < 400 && best_err > tol; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (!(mid > lo && mid < hi)) break;
    const double fm = excess(mid);
    if (std::abs(fm) < best_err) {
      best = mid;
      best_err = std::abs(fm);
    }
    if (fm < 0.0) lo = mid;
    else hi = mid;
  }
  return std::exp(best);
}

}  // namespace mpmi
