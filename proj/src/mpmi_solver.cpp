#include "mpmi/mpmi_solver.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mpmi/errors.hpp"
#include "mpmi/spectral_filter.hpp"

namespace mpmi {

namespace {

void check_rhs(const SvdFactors& f, const Vector& v) {
  if (static_cast<std::size_t>(v.size()) != f.rows()) {
    throw InputError("right-hand side has length " + std::to_string(v.size()) + ", expected " +
                     std::to_string(f.rows()));
  }
}

void check_family(const SvdFactors& f, const FilterFamily& family) {
  if (family.size() > f.min_dim()) {
    throw InputError("filter family has " + std::to_string(family.size()) +
                     " members but the spectrum only " + std::to_string(f.min_dim()));
  }
}

double tail_energy(const Vector& v, std::size_t from) {
  const auto start = static_cast<Eigen::Index>(from);
  return v.tail(v.size() - start).squaredNorm();
}

// beta_delta^2 with the tail energy supplied by the caller.
double beta_sq_with_tail(double h, const Vector& v, const FilterFamily& family, double tail,
                         Side side) {
  double sum = tail;
  for (std::size_t k = 0; k < family.size(); ++k) {
    const double vk = v[static_cast<Eigen::Index>(k)];
    if (vk == 0.0) continue;
    const double q = family.residual_factor(k, h, side);
    sum += q * q * vk * vk;
  }
  return sum;
}

std::vector<double> sorted_breakpoints(const FilterFamily& family) {
  std::vector<double> b;
  b.reserve(family.size());
  for (std::size_t k = 0; k < family.size(); ++k) b.push_back(family.breakpoint(k));
  std::sort(b.begin(), b.end());
  b.erase(std::unique(b.begin(), b.end()), b.end());
  return b;
}

}  // namespace

double FilterFamily::cap() const {
  double h1 = 0.0;
  for (std::size_t k = 0; k < size(); ++k) h1 = std::max(h1, breakpoint(k));
  return 2.0 * h1;
}

double FilterFamily::x(std::size_t k, double h) const {
  if (h > breakpoint(k)) return 0.0;
  return 1.0 + excess(k, h);
}

double FilterFamily::residual_factor(std::size_t k, double h, Side side) const {
  if (h == 0.0) return 0.0;
  const double bp = breakpoint(k);
  const bool annihilated = side == Side::left ? h > bp : h >= bp;
  if (annihilated) return 1.0;
  const double y = excess(k, h);
  return y / (1.0 + y);
}

MpmiFamily::MpmiFamily(Vector leading_sigma) : sigma_(std::move(leading_sigma)) {
  for (Eigen::Index k = 0; k < sigma_.size(); ++k) {
    if (!(sigma_[k] > 0.0) || !std::isfinite(sigma_[k])) {
      throw InputError("filter family needs positive singular values");
    }
  }
}

double MpmiFamily::breakpoint(std::size_t k) const {
  return mpm_breakpoint(sigma_[static_cast<Eigen::Index>(k)]);
}

double MpmiFamily::bound(std::size_t) const { return kMaxInflation; }

double MpmiFamily::slope(std::size_t k) const {
  const double r2 = sigma_[static_cast<Eigen::Index>(k)] * sigma_[static_cast<Eigen::Index>(k)];
  return 1.0 / (r2 * r2);
}

double MpmiFamily::excess(std::size_t k, double h) const {
  const double bp = breakpoint(k);
  if (h >= bp) return 0.5;
  const double r2 = sigma_[static_cast<Eigen::Index>(k)] * sigma_[static_cast<Eigen::Index>(k)];
  return quartic_excess(std::min(h / (r2 * r2), kQuarticMaxParameter));
}

MpmiFamily mpmi_family(const SvdFactors& f) {
  return MpmiFamily(f.sigma.head(static_cast<Eigen::Index>(f.rank())));
}

double mpmi_x(double rho, double h) {
  if (!(rho > 0.0)) throw InputError("mpmi_x: rho must be positive");
  if (!(h >= 0.0)) throw InputError("mpmi_x: h must be nonnegative");
  Vector s(1);
  s[0] = rho;
  return MpmiFamily(std::move(s)).x(0, h);
}

double mu_delta(const SvdFactors& f, const Vector& u_delta) {
  const Vector v = f.project(u_delta);
  return std::sqrt(tail_energy(v, f.rank()));
}

double beta_delta_sq(double h, const SvdFactors& f, const Vector& v, const FilterFamily& family,
                     Side side) {
  check_rhs(f, v);
  check_family(f, family);
  if (!(h >= 0.0)) throw InputError("beta_delta_sq: h must be nonnegative");
  return beta_sq_with_tail(h, v, family, tail_energy(v, family.size()), side);
}

DiscrepancyCurve discrepancy_curve(const SvdFactors& f, const Vector& v, const FilterFamily& family,
                                   std::size_t sample_count) {
  check_rhs(f, v);
  check_family(f, family);
  DiscrepancyCurve curve;
  const double tail = tail_energy(v, family.size());
  curve.mu_delta_sq = tail;
  curve.u_norm_sq = v.squaredNorm();

  const std::vector<double> breaks = sorted_breakpoints(family);
  for (const double b : breaks) {
    curve.jumps.push_back({b, beta_sq_with_tail(b, v, family, tail, Side::left),
                           beta_sq_with_tail(b, v, family, tail, Side::right)});
  }
  if (sample_count == 0 || breaks.empty()) return curve;

  curve.samples.reserve(sample_count);
  curve.samples.push_back({0.0, beta_sq_with_tail(0.0, v, family, tail, Side::left)});
  if (sample_count > 1) {
    const double lo = std::log(breaks.front() * 1e-3);
    const double hi = std::log(family.cap());
    const std::size_t n = sample_count - 1;
    for (std::size_t i = 0; i < n; ++i) {
      const double frac = n == 1 ? 1.0 : static_cast<double>(i) / static_cast<double>(n - 1);
      const double h = std::exp(lo + frac * (hi - lo));
      curve.samples.push_back({h, beta_sq_with_tail(h, v, family, tail, Side::left)});
    }
  }
  return curve;
}

HDeltaSolution solve_h_delta(const SvdFactors& f, const Vector& u_delta, double delta_abs,
                             const FilterFamily& family, std::size_t curve_samples) {
  require_finite(u_delta, "right-hand side");
  if (!(delta_abs > 0.0) || !std::isfinite(delta_abs)) {
    throw InputError("noise level must be positive");
  }
  check_family(f, family);
  const Vector v = f.project(u_delta);
  const double tail = tail_energy(v, family.size());
  const double plateau = v.squaredNorm();
  if (plateau == 0.0) throw InputError("right-hand side is zero");

  HDeltaSolution out;
  out.target = delta_abs * delta_abs + tail;
  if (out.target >= plateau) {
    throw NoiseDominatesError("delta^2 + mu^2 = " + std::to_string(out.target) +
                              " is not below |u|^2 = " + std::to_string(plateau));
  }

  const std::vector<double> breaks = sorted_breakpoints(family);
  const GeneralizedRoot root = detail::generalized_root(
      breaks,
      [&](double h, Side side) { return beta_sq_with_tail(h, v, family, tail, side); },
      out.target);
  out.h = root.value;
  out.jump = root.jump;
  if (curve_samples > 0) out.curve = discrepancy_curve(f, v, family, curve_samples);
  else {
    out.curve.mu_delta_sq = tail;
    out.curve.u_norm_sq = plateau;
  }
  return out;
}

Vector filtered_spectrum(const SvdFactors& f, const FilterFamily& family, double h) {
  check_family(f, family);
  Vector s = Vector::Zero(f.sigma.size());
  for (std::size_t k = 0; k < family.size(); ++k) {
    const auto i = static_cast<Eigen::Index>(k);
    s[i] = f.sigma[i] * family.x(k, h);
  }
  return s;
}

double condition_number_filtered(const SvdFactors& f, const FilterFamily& family, double h) {
  const Vector s = filtered_spectrum(f, family, h);
  double largest = 0.0;
  double smallest = 0.0;
  for (Eigen::Index k = 0; k < s.size(); ++k) {
    if (s[k] <= 0.0) continue;
    largest = std::max(largest, s[k]);
    smallest = smallest == 0.0 ? s[k] : std::min(smallest, s[k]);
  }
  if (largest == 0.0) throw UndefinedConditionError("every filtered singular value is zero");
  return largest / smallest;
}

SolveReport mpmi_solve(const SvdFactors& f, const Vector& u_delta, double delta_abs) {
  const MpmiFamily family = mpmi_family(f);
  if (family.size() == 0) throw InputError("matrix has numerical rank zero");
  const HDeltaSolution sol = solve_h_delta(f, u_delta, delta_abs, family);
  const Vector filtered = filtered_spectrum(f, family, sol.h);

  SolveReport r;
  r.method = Method::mpmi;
  r.solution = apply_filtered_pinv(f, filtered, u_delta);
  r.chosen_parameter = sol.h;
  r.effective_rank = static_cast<std::size_t>((filtered.array() > 0.0).count());
  r.numerical_rank = family.size();
  r.condition_number = condition_number_filtered(f, family, sol.h);
  r.residual = std::sqrt(beta_sq_with_tail(sol.h, f.project(u_delta), family,
                                           sol.curve.mu_delta_sq, Side::left));
  r.mu_delta = std::sqrt(sol.curve.mu_delta_sq);
  r.jump_root = sol.jump;
  return r;
}

SolveReport mpmi_solve(const DenseMatrix& a_bar, const Vector& u_delta, double delta_abs) {
  return mpmi_solve(svd(a_bar), u_delta, delta_abs);
}

}  // namespace mpmi
