#include "mpmi/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mpmi/errors.hpp"

namespace mpmi {

namespace {

void require_finite_entries(std::span<const double> values, const char* what) {
  const auto bad = std::find_if(values.begin(), values.end(),
                                [](double x) { return !std::isfinite(x); });
  if (bad != values.end()) {
    throw InputError(std::string(what) + ": non-finite entry at position " +
                     std::to_string(bad - values.begin()));
  }
}

}  // namespace

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> entries) {
  if (rows == 0 || cols == 0) {
    throw InputError("matrix dimensions must be positive");
  }
  if (entries.size() != rows * cols) {
    throw InputError("matrix storage holds " + std::to_string(entries.size()) +
                     " entries, expected " + std::to_string(rows * cols));
  }
  require_finite_entries(entries, "matrix");
  data_ = Eigen::Map<const RowMajorMatrix>(entries.data(), static_cast<Eigen::Index>(rows),
                                           static_cast<Eigen::Index>(cols));
}

DenseMatrix::DenseMatrix(const Eigen::Ref<const Eigen::MatrixXd>& m) {
  if (m.rows() == 0 || m.cols() == 0) {
    throw InputError("matrix dimensions must be positive");
  }
  if (!m.allFinite()) {
    throw InputError("matrix: non-finite entry");
  }
  data_ = m;
}

DenseMatrix DenseMatrix::identity(std::size_t n) {
  return DenseMatrix(Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(n),
                                               static_cast<Eigen::Index>(n)));
}

DenseMatrix DenseMatrix::diagonal(std::span<const double> values) {
  return diagonal(values.size(), values.size(), values);
}

DenseMatrix DenseMatrix::diagonal(std::size_t rows, std::size_t cols,
                                  std::span<const double> values) {
  if (values.size() > std::min(rows, cols)) {
    throw InputError("too many diagonal values for a " + std::to_string(rows) + "x" +
                     std::to_string(cols) + " matrix");
  }
  std::vector<double> entries(rows * cols, 0.0);
  for (std::size_t k = 0; k < values.size(); ++k) entries[k * cols + k] = values[k];
  return DenseMatrix(rows, cols, std::move(entries));
}

Vector DenseMatrix::multiply(const Vector& x) const {
  if (static_cast<std::size_t>(x.size()) != cols()) {
    throw InputError("matrix-vector product: vector length " + std::to_string(x.size()) +
                     " does not match " + std::to_string(cols()) + " columns");
  }
  return data_ * x;
}

void require_finite(const Vector& v, const char* what) {
  if (v.size() == 0) throw InputError(std::string(what) + ": empty vector");
  require_finite_entries({v.data(), static_cast<std::size_t>(v.size())}, what);
}

double frobenius_norm(const DenseMatrix& a) { return a.eigen().norm(); }

}  // namespace mpmi
