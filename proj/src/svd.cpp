#include "mpmi/svd.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "mpmi/errors.hpp"

namespace mpmi {

namespace {

// One-sided Jacobi keeps small singular values accurate but its cost grows
// quickly; divide-and-conquer takes over for large factorizations.
constexpr Eigen::Index kJacobiMaxDim = 512;

template <typename Solver>
void check_info(const Solver& solver, Eigen::Index rows, Eigen::Index cols) {
  if (solver.info() != Eigen::Success) {
    throw FactorizationError("SVD did not converge for a " + std::to_string(rows) + "x" +
                                 std::to_string(cols) + " matrix",
                             -1);
  }
}

void check_dims(const SvdFactors& f, const Vector& filtered_sigma) {
  if (static_cast<std::size_t>(filtered_sigma.size()) != f.min_dim()) {
    throw InputError("filtered spectrum has length " + std::to_string(filtered_sigma.size()) +
                     ", expected " + std::to_string(f.min_dim()));
  }
}

Vector inverted(const Vector& filtered_sigma) {
  Vector inv(filtered_sigma.size());
  for (Eigen::Index k = 0; k < filtered_sigma.size(); ++k) inv[k] = theta(filtered_sigma[k]);
  return inv;
}

}  // namespace

std::size_t SvdFactors::rank() const noexcept {
  std::size_t r = 0;
  while (r < min_dim() && sigma[static_cast<Eigen::Index>(r)] > rank_tolerance) ++r;
  return r;
}

Vector SvdFactors::project(const Vector& rhs) const {
  if (static_cast<std::size_t>(rhs.size()) != rows()) {
    throw InputError("right-hand side has length " + std::to_string(rhs.size()) + ", expected " +
                     std::to_string(rows()));
  }
  return u.transpose() * rhs;
}

double default_rank_tolerance(double sigma_max, std::size_t rows, std::size_t cols) {
  return sigma_max * static_cast<double>(std::max(rows, cols)) *
         std::numeric_limits<double>::epsilon();
}

SvdFactors svd(const DenseMatrix& a, std::optional<double> rank_tolerance) {
  const Eigen::MatrixXd dense = a.eigen();
  if (!dense.allFinite()) throw InputError("svd: non-finite entry");
  if (dense.norm() == 0.0) throw InputError("svd: zero matrix");
  if (rank_tolerance && !(*rank_tolerance >= 0.0)) {
    throw InputError("svd: rank tolerance must be nonnegative");
  }

  SvdFactors f;
  const auto opts = Eigen::ComputeFullU | Eigen::ComputeFullV;
  if (std::min(dense.rows(), dense.cols()) <= kJacobiMaxDim) {
    Eigen::JacobiSVD<Eigen::MatrixXd> solver(dense, opts);
    check_info(solver, dense.rows(), dense.cols());
    f.u = solver.matrixU();
    f.v = solver.matrixV();
    f.sigma = solver.singularValues();
  } else {
    Eigen::BDCSVD<Eigen::MatrixXd> solver(dense, opts);
    check_info(solver, dense.rows(), dense.cols());
    f.u = solver.matrixU();
    f.v = solver.matrixV();
    f.sigma = solver.singularValues();
  }
  f.rank_tolerance = rank_tolerance.value_or(default_rank_tolerance(f.sigma[0], a.rows(), a.cols()));
  return f;
}

double theta(double rho) {
  if (!(rho >= 0.0)) throw InputError("theta: argument must be nonnegative");
  return rho > 0.0 ? 1.0 / rho : 0.0;
}

Vector apply_filtered_pinv(const SvdFactors& f, const Vector& filtered_sigma, const Vector& rhs) {
  check_dims(f, filtered_sigma);
  const Eigen::Index mdim = filtered_sigma.size();
  Vector coeffs = f.project(rhs).head(mdim).cwiseProduct(inverted(filtered_sigma));
  return f.v.leftCols(mdim) * coeffs;
}

DenseMatrix filtered_pinv_matrix(const SvdFactors& f, const Vector& filtered_sigma) {
  check_dims(f, filtered_sigma);
  const Eigen::Index mdim = filtered_sigma.size();
  const Eigen::MatrixXd x = f.v.leftCols(mdim) * inverted(filtered_sigma).asDiagonal() *
                            f.u.leftCols(mdim).transpose();
  return DenseMatrix(x);
}

DenseMatrix filtered_matrix(const SvdFactors& f, const Vector& filtered_sigma) {
  check_dims(f, filtered_sigma);
  const Eigen::Index mdim = filtered_sigma.size();
  const Eigen::MatrixXd a =
      f.u.leftCols(mdim) * filtered_sigma.asDiagonal() * f.v.leftCols(mdim).transpose();
  return DenseMatrix(a);
}

double PinvCheckReport::max() const noexcept {
  return std::max({axa_minus_a, xax_minus_x, ax_symmetric, xa_symmetric});
}

PinvCheckReport moore_penrose_check(const DenseMatrix& a, const DenseMatrix& a_plus) {
  if (a_plus.rows() != a.cols() || a_plus.cols() != a.rows()) {
    throw InputError("moore_penrose_check: candidate must be " + std::to_string(a.cols()) + "x" +
                     std::to_string(a.rows()));
  }
  const Eigen::MatrixXd am = a.eigen();
  const Eigen::MatrixXd xm = a_plus.eigen();
  const auto scale = [](double v) { return v > 0.0 ? v : 1.0; };
  const double na = scale(am.norm());
  const double nx = scale(xm.norm());
  const Eigen::MatrixXd ax = am * xm;
  const Eigen::MatrixXd xa = xm * am;

  PinvCheckReport r;
  r.axa_minus_a = (ax * am - am).norm() / na;
  r.xax_minus_x = (xa * xm - xm).norm() / nx;
  r.ax_symmetric = (ax.transpose() - ax).norm() / (na * nx);
  r.xa_symmetric = (xa.transpose() - xa).norm() / (na * nx);
  return r;
}

double spectral_cond(const SvdFactors& f) {
  const std::size_t r = f.rank();
  if (r == 0) throw UndefinedConditionError("spectral condition number of a rank-zero matrix");
  return f.sigma[0] / f.sigma[static_cast<Eigen::Index>(r - 1)];
}

}  // namespace mpmi
