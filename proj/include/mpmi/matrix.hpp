#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace mpmi {

using RowMajorMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Real vectors are plain Eigen vectors; functions that accept them check
/// finiteness at the boundary with `require_finite`.
using Vector = Eigen::VectorXd;

/// Immutable real m x n matrix, row-major, all entries finite.
class DenseMatrix {
public:
  DenseMatrix() = default;

  /// Throws InputError on zero dimensions, size mismatch or non-finite entries.
  DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> entries);

  explicit DenseMatrix(const Eigen::Ref<const Eigen::MatrixXd>& m);

  static DenseMatrix identity(std::size_t n);
  static DenseMatrix diagonal(std::span<const double> values);
  static DenseMatrix diagonal(std::size_t rows, std::size_t cols, std::span<const double> values);

  std::size_t rows() const noexcept { return static_cast<std::size_t>(data_.rows()); }
  std::size_t cols() const noexcept { return static_cast<std::size_t>(data_.cols()); }
  double operator()(std::size_t i, std::size_t j) const {
    return data_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  }

  /// Row-major entry storage.
  std::span<const double> entries() const noexcept {
    return {data_.data(), static_cast<std::size_t>(data_.size())};
  }
  const RowMajorMatrix& eigen() const noexcept { return data_; }

  Vector multiply(const Vector& x) const;

private:
  RowMajorMatrix data_;
};

void require_finite(const Vector& v, const char* what);

double frobenius_norm(const DenseMatrix& a);

}  // namespace mpmi
