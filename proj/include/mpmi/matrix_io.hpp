#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>

#include "mpmi/matrix.hpp"

namespace mpmi::io {

/// Shortest decimal string that parses back to exactly `x`.
std::string format_double(double x);

/// Parses a full decimal or scientific literal; throws InputError otherwise.
double parse_double(std::string_view text);

enum class MatrixFormat { csv, matrix_market };

/// CSV layout: first line `rows,cols`, then entries row-major, comma separated.
DenseMatrix read_csv(std::istream& in);
void write_csv(std::ostream& out, const DenseMatrix& a);

/// MatrixMarket `array real general`; entries are column-major per the format.
DenseMatrix read_matrix_market(std::istream& in);
void write_matrix_market(std::ostream& out, const DenseMatrix& a);

/// Picks the format from the content: a `%%MatrixMarket` banner means
/// MatrixMarket, anything else is CSV.
DenseMatrix read_matrix(std::istream& in);
DenseMatrix read_matrix_file(const std::filesystem::path& path);

/// `.mtx` selects MatrixMarket, any other extension CSV.
void write_matrix_file(const std::filesystem::path& path, const DenseMatrix& a);

/// Vectors are stored as n x 1 (or 1 x n) matrices.
Vector read_vector_file(const std::filesystem::path& path);
void write_vector_csv(std::ostream& out, const Vector& v);
void write_vector_file(const std::filesystem::path& path, const Vector& v);

}  // namespace mpmi::io
