#include "mpmi/matrix_io.hpp"

#include <array>
#include <charconv>
#include <fstream>
#include <sstream>
#include <vector>

#include "mpmi/errors.hpp"

namespace mpmi::io {

namespace {

constexpr std::string_view kMatrixMarketBanner = "%%MatrixMarket";

std::string_view trim(std::string_view s) {
  const auto is_space = [](char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; };
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

std::size_t parse_count(std::string_view text, const char* what) {
  text = trim(text);
  std::size_t value = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size() || value == 0) {
    throw InputError("parse_error", std::string("invalid ") + what + ": '" + std::string(text) + "'");
  }
  return value;
}

// Splits on commas and whitespace, skipping empty fields.
void tokenize(std::string_view line, std::vector<std::string_view>& out) {
  std::size_t start = 0;
  const auto is_sep = [](char c) {
    return c == ',' || c == ' ' || c == '\t' || c == '\r' || c == '\n';
  };
  for (std::size_t i = 0; i <= line.size(); ++i) {
    if (i == line.size() || is_sep(line[i])) {
      if (i > start) out.push_back(line.substr(start, i - start));
      start = i + 1;
    }
  }
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw InputError("io_error", "cannot open '" + path.string() + "' for writing");
  return out;
}

}  // namespace

std::string format_double(double x) {
  std::array<char, 32> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), x);
  if (ec != std::errc{}) throw InputError("cannot format number");
  return {buf.data(), ptr};
}

double parse_double(std::string_view text) {
  text = trim(text);
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw InputError("parse_error", "invalid number: '" + std::string(text) + "'");
  }
  return value;
}

DenseMatrix read_csv(std::istream& in) {
  std::string line;
  std::string_view header;
  while (std::getline(in, line)) {
    header = trim(line);
    if (!header.empty()) break;
  }
  const auto comma = header.find(',');
  if (header.empty() || comma == std::string_view::npos) {
    throw InputError("parse_error", "CSV header must be 'rows,cols'");
  }
  const std::size_t rows = parse_count(header.substr(0, comma), "row count");
  const std::size_t cols = parse_count(header.substr(comma + 1), "column count");

  std::vector<double> entries;
  entries.reserve(rows * cols);
  std::vector<std::string_view> tokens;
  while (std::getline(in, line)) {
    tokens.clear();
    tokenize(line, tokens);
    for (auto t : tokens) entries.push_back(parse_double(t));
  }
  if (entries.size() != rows * cols) {
    throw InputError("parse_error", "CSV declares " + std::to_string(rows) + "x" +
                                        std::to_string(cols) + " but holds " +
                                        std::to_string(entries.size()) + " entries");
  }
  return DenseMatrix(rows, cols, std::move(entries));
}

void write_csv(std::ostream& out, const DenseMatrix& a) {
  out << a.rows() << ',' << a.cols() << '\n';
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < a.cols(); ++j) {
      if (j) out << ',';
      out << format_double(a(i, j));
    }
    out << '\n';
  }
}

DenseMatrix read_matrix_market(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || trim(line).substr(0, kMatrixMarketBanner.size()) != kMatrixMarketBanner) {
    throw InputError("parse_error", "missing %%MatrixMarket banner");
  }
  std::istringstream banner{std::string(trim(line))};
  std::string tag, object, format, field, symmetry;
  banner >> tag >> object >> format >> field >> symmetry;
  if (object != "matrix" || format != "array" || field != "real" || symmetry != "general") {
    throw InputError("parse_error", "only 'matrix array real general' MatrixMarket files are supported");
  }

  std::vector<std::string_view> tokens;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> col_major;
  while (std::getline(in, line)) {
    const auto body = trim(line);
    if (body.empty() || body.front() == '%') continue;
    tokens.clear();
    tokenize(body, tokens);
    if (rows == 0) {
      if (tokens.size() != 2) throw InputError("parse_error", "MatrixMarket size line must be 'rows cols'");
      rows = parse_count(tokens[0], "row count");
      cols = parse_count(tokens[1], "column count");
      col_major.reserve(rows * cols);
      continue;
    }
    for (auto t : tokens) col_major.push_back(parse_double(t));
  }
  if (rows == 0) throw InputError("parse_error", "MatrixMarket file has no size line");
  if (col_major.size() != rows * cols) {
    throw InputError("parse_error", "MatrixMarket declares " + std::to_string(rows * cols) +
                                        " entries but holds " + std::to_string(col_major.size()));
  }
  std::vector<double> row_major(rows * cols);
  for (std::size_t j = 0; j < cols; ++j)
    for (std::size_t i = 0; i < rows; ++i) row_major[i * cols + j] = col_major[j * rows + i];
  return DenseMatrix(rows, cols, std::move(row_major));
}

void write_matrix_market(std::ostream& out, const DenseMatrix& a) {
  out << kMatrixMarketBanner << " matrix array real general\n";
  out << a.rows() << ' ' << a.cols() << '\n';
  for (std::size_t j = 0; j < a.cols(); ++j)
    for (std::size_t i = 0; i < a.rows(); ++i) out << format_double(a(i, j)) << '\n';
}

DenseMatrix read_matrix(std::istream& in) {
  std::stringstream buffer;
  buffer << in.rdbuf();
  const std::string text = buffer.str();
  std::istringstream again(text);
  if (trim(text).substr(0, kMatrixMarketBanner.size()) == kMatrixMarketBanner) {
    return read_matrix_market(again);
  }
  return read_csv(again);
}

DenseMatrix read_matrix_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("io_error", "cannot open '" + path.string() + "'");
  return read_matrix(in);
}

void write_matrix_file(const std::filesystem::path& path, const DenseMatrix& a) {
  auto out = open_output(path);
  if (path.extension() == ".mtx") {
    write_matrix_market(out, a);
  } else {
    write_csv(out, a);
  }
}

Vector read_vector_file(const std::filesystem::path& path) {
  const DenseMatrix m = read_matrix_file(path);
  if (m.cols() != 1 && m.rows() != 1) {
    throw InputError("parse_error", "'" + path.string() + "' holds a " + std::to_string(m.rows()) +
                                        "x" + std::to_string(m.cols()) + " matrix, expected a vector");
  }
  const auto e = m.entries();
  return Eigen::Map<const Vector>(e.data(), static_cast<Eigen::Index>(e.size()));
}

void write_vector_csv(std::ostream& out, const Vector& v) {
  out << v.size() << ",1\n";
  for (Eigen::Index i = 0; i < v.size(); ++i) out << format_double(v[i]) << '\n';
}

void write_vector_file(const std::filesystem::path& path, const Vector& v) {
  auto out = open_output(path);
  if (path.extension() == ".mtx") {
    write_matrix_market(out, DenseMatrix(Eigen::MatrixXd(v)));
  } else {
    write_vector_csv(out, v);
  }
}

}  // namespace mpmi::io
