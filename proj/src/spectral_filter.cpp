#include "mpmi/spectral_filter.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "mpmi/errors.hpp"

namespace mpmi {

double quartic_excess(double t) {
  if (!(t >= 0.0 && t <= kQuarticMaxParameter)) {
    throw InputError("quartic parameter " + std::to_string(t) + " outside [0, 27/16]");
  }
  if (t == 0.0) return 0.0;
  if (t == kQuarticMaxParameter) return 0.5;

  // g(y) = y (1 + y)^3 - t is increasing and convex on [0, 1/2] with g(y) >= y - t,
  // so Newton from y0 = min(t, 1/2) >= root decreases monotonically onto the root.
  double y = std::min(t, 0.5);
  for (int iter = 0; iter < 100; ++iter) {
    const double p = 1.0 + y;
    const double g = y * p * p * p - t;
    const double dg = p * p * (1.0 + 4.0 * y);
    const double next = y - g / dg;
    if (!(next < y)) break;
    y = next;
  }
  return std::clamp(y, 0.0, 0.5);
}

double solve_quartic_monotone(double t) { return 1.0 + quartic_excess(t); }

double mpm_breakpoint(double rho) {
  const double r2 = rho * rho;
  return kQuarticMaxParameter * (r2 * r2);
}

namespace {

void require_rho(double rho) {
  if (!(rho > 0.0) || !std::isfinite(rho)) {
    throw InputError("singular value must be positive and finite");
  }
}

void require_level(double lambda, const char* what) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw InputError(std::string(what) + " must be nonnegative and finite");
  }
}

// Quartic parameter lambda / rho^4 for lambda in [0, lambda_k], clamped
// against rounding just below the breakpoint.
double quartic_parameter(double lambda, double rho, double breakpoint) {
  if (lambda == breakpoint) return kQuarticMaxParameter;
  const double r2 = rho * rho;
  return std::min(lambda / (r2 * r2), kQuarticMaxParameter);
}

// (rho_k(lambda) - rho_k)^2 for one term, with the one-sided convention at
// the breakpoint.
double beta_term(double rho, double lambda, Side side) {
  if (!(rho > 0.0) || lambda == 0.0) return 0.0;
  const double bp = mpm_breakpoint(rho);
  const bool annihilated = side == Side::left ? lambda > bp : lambda >= bp;
  if (annihilated) return rho * rho;
  const double d = rho * quartic_excess(quartic_parameter(lambda, rho, bp));
  return d * d;
}

}  // namespace

double mpm_filtered_value(double rho, double lambda) {
  require_rho(rho);
  require_level(lambda, "lambda");
  if (lambda == 0.0) return rho;
  const double bp = mpm_breakpoint(rho);
  if (lambda > bp) return 0.0;
  if (lambda == bp) return kMaxInflation * rho;
  return rho * solve_quartic_monotone(quartic_parameter(lambda, rho, bp));
}

double mpm_beta(double lambda, const Vector& sigma, Side side) {
  require_level(lambda, "lambda");
  double sum = 0.0;
  for (Eigen::Index k = 0; k < sigma.size(); ++k) sum += beta_term(sigma[k], lambda, side);
  return sum;
}

GeneralizedRoot mpm_solve_lambda(double h, const Vector& sigma) {
  if (!(h > 0.0) || !std::isfinite(h)) throw InputError("matrix error level h must be positive");
  require_finite(sigma, "singular values");
  if ((sigma.array() < 0.0).any()) throw InputError("singular values must be nonnegative");

  const double target = h * h;
  const double energy = sigma.squaredNorm();
  if (target >= energy) {
    throw EnergyExceededError("h^2 = " + std::to_string(target) +
                              " is not below the matrix energy " + std::to_string(energy));
  }

  std::vector<double> breaks;
  breaks.reserve(static_cast<std::size_t>(sigma.size()));
  for (Eigen::Index k = 0; k < sigma.size(); ++k) {
    if (sigma[k] > 0.0) breaks.push_back(mpm_breakpoint(sigma[k]));
  }
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());

  return detail::generalized_root(
      breaks, [&](double lambda, Side side) { return mpm_beta(lambda, sigma, side); }, target);
}

std::size_t MpmSpectrum::rank() const noexcept {
  return static_cast<std::size_t>((filtered_sigma.array() > 0.0).count());
}

MpmSpectrum mpm_spectrum(const SvdFactors& f, double h) {
  MpmSpectrum s;
  s.sigma = f.sigma;
  const GeneralizedRoot root = mpm_solve_lambda(h, f.sigma);
  s.lambda_chosen = root.value;
  s.jump = root.jump;
  s.lambda_breaks.resize(f.sigma.size());
  s.filtered_sigma.resize(f.sigma.size());
  for (Eigen::Index k = 0; k < f.sigma.size(); ++k) {
    const double rho = f.sigma[k];
    s.lambda_breaks[k] = rho > 0.0 ? mpm_breakpoint(rho) : 0.0;
    s.filtered_sigma[k] = rho > 0.0 ? mpm_filtered_value(rho, s.lambda_chosen) : 0.0;
  }
  return s;
}

MpmResult mpm_pseudoinverse(const SvdFactors& f, double h) {
  MpmSpectrum spectrum = mpm_spectrum(f, h);
  DenseMatrix pinv = filtered_pinv_matrix(f, spectrum.filtered_sigma);
  DenseMatrix approx = filtered_matrix(f, spectrum.filtered_sigma);
  const double distance = (spectrum.filtered_sigma - spectrum.sigma).norm();
  return {std::move(pinv), std::move(approx), std::move(spectrum), distance};
}

MpmResult mpm_pseudoinverse(const DenseMatrix& a_h, double h) {
  return mpm_pseudoinverse(svd(a_h), h);
}

SolveReport mpm_solve(const SvdFactors& f, const Vector& u, double h) {
  require_finite(u, "right-hand side");
  const MpmSpectrum s = mpm_spectrum(f, h);
  const Vector v = f.project(u);
  SolveReport r;
  r.method = Method::mpm;
  r.solution = apply_filtered_pinv(f, s.filtered_sigma, u);
  r.chosen_parameter = s.lambda_chosen;
  r.effective_rank = s.rank();
  r.numerical_rank = f.rank();
  r.jump_root = s.jump;
  if (r.effective_rank == 0) throw UndefinedConditionError("every filtered singular value is zero");
  r.condition_number = s.filtered_sigma[0] /
                       s.filtered_sigma[static_cast<Eigen::Index>(r.effective_rank - 1)];
  // A = U diag(sigma) V^T, so A z - u has components (sigma_k theta(s_k) - 1) v_k.
  double res2 = 0.0;
  for (Eigen::Index k = 0; k < v.size(); ++k) {
    const double gain = k < s.sigma.size() ? s.sigma[k] * theta(s.filtered_sigma[k]) : 0.0;
    res2 += (gain - 1.0) * (gain - 1.0) * v[k] * v[k];
  }
  r.residual = std::sqrt(res2);
  r.mu_delta = std::sqrt(v.tail(v.size() - static_cast<Eigen::Index>(f.rank())).squaredNorm());
  return r;
}

}  // namespace mpmi
