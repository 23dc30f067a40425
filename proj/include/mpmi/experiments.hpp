#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "mpmi/baselines.hpp"
#include "mpmi/matrix.hpp"
#include "mpmi/mpmi_solver.hpp"
#include "mpmi/solve_report.hpp"
#include "mpmi/svd.hpp"

namespace mpmi {

/// Kernel matrix 1 / ((x_i - y_j)^2 + H0^2) on uniform grids of [-1, 1], with
/// truth z(y) = (1 - y^2) sin(4 pi y) and u_bar = A z_bar.
struct PoissonProblem {
  std::size_t m = 0;
  std::size_t n = 0;
  double h0 = 0.0;
  Vector x_grid;
  Vector y_grid;
  DenseMatrix matrix;
  Vector z_bar;
  Vector u_bar;
};

PoissonProblem build_poisson(std::size_t m, std::size_t n, double h0);

/// u_bar + delta_rel |u_bar| e / |e| with e i.i.d. standard normal from a
/// generator seeded with `seed`.
Vector perturb_rhs(const Vector& u_bar, double delta_rel, std::uint64_t seed);

/// |z - z_bar| / |z_bar|.
double relative_error(const Vector& z, const Vector& z_bar);

enum class Aggregation { median, mean };

inline constexpr std::size_t kDeskRows = 199;
inline constexpr std::size_t kDeskCols = 201;
inline constexpr std::size_t kFullRows = 1991;
inline constexpr std::size_t kFullCols = 2001;

struct ExperimentConfig {
  std::size_t m = kDeskRows;
  std::size_t n = kDeskCols;
  double h0 = 0.1;
  std::vector<double> deltas{0.005, 0.01, 0.05, 0.1, 0.2, 0.3};
  std::vector<std::uint64_t> seeds;
  std::vector<Method> methods{Method::mpmi, Method::tsvd, Method::tr};
  Aggregation aggregation = Aggregation::median;
  DiscrepancyTarget target = DiscrepancyTarget::with_mu;
  /// Matrix error level for the MPM method, relative to |A|_F.
  double mpm_h_rel = 1e-10;
  /// Points per dumped discrepancy curve; 0 disables the dump.
  std::size_t curve_samples = 0;
  /// Worker threads; 0 means MPMI_THREADS or the hardware concurrency.
  unsigned threads = 0;

  /// Throws InputError if a field is out of range.
  void validate() const;
};

ExperimentConfig desk_scale_config();
void use_full_scale(ExperimentConfig& config);

/// Flat `key = value` text; `#` starts a comment. Keys: m, n, h0, deltas,
/// seeds (comma list, `a-b` ranges allowed), methods, aggregation, scale
/// (desk | full), target (with_mu | absolute), mpm_h, curve_samples, threads.
ExperimentConfig parse_config(std::istream& in);
ExperimentConfig load_config(const std::filesystem::path& path);

struct RunRecord {
  Method method = Method::mpmi;
  double delta = 0.0;
  std::uint64_t seed = 0;
  bool ok = false;
  std::string error;
  double accuracy = 0.0;
  double condition_number = 0.0;
  double parameter = 0.0;
  std::size_t effective_rank = 0;
  bool jump = false;
};

struct TableRow {
  Method method = Method::mpmi;
  double delta = 0.0;
  std::size_t runs = 0;
  std::size_t failures = 0;
  std::size_t jumps = 0;
  std::optional<double> accuracy;
  std::optional<double> condition_number;
  std::optional<double> parameter;
  std::optional<double> effective_rank;

  double jump_fraction() const noexcept;
};

struct CurveDump {
  double delta = 0.0;
  std::uint64_t seed = 0;
  double h_delta = 0.0;
  DiscrepancyCurve curve;
};

struct ExperimentTable {
  ExperimentConfig config;
  double exact_condition = 0.0;
  double raw_condition = 0.0;  // sigma_1 / sigma_M without the rank cut
  std::size_t numerical_rank = 0;
  std::vector<TableRow> rows;     // method-major, then delta
  std::vector<RunRecord> runs;    // method-major, then delta, then seed
  std::vector<CurveDump> curves;  // first seed of each delta, when enabled

  const TableRow& row(Method method, double delta) const;
};

ExperimentTable run_experiment(const ExperimentConfig& config);

/// Same, on a problem and factorization the caller already holds.
ExperimentTable run_experiment(const ExperimentConfig& config, const PoissonProblem& problem,
                               const SvdFactors& factors);

/// One row per method x delta.
void write_table_csv(std::ostream& out, const ExperimentTable& table);
/// Config echo, aggregated rows and per-seed detail.
void write_detail_json(std::ostream& out, const ExperimentTable& table);
/// Columns h, beta_sq, followed by the jump table as h, left, right.
void write_curve_csv(std::ostream& out, const CurveDump& dump);

/// Writes table.csv, detail.json and one beta_curve_*.csv per dump into `dir`.
void write_experiment_outputs(const std::filesystem::path& dir, const ExperimentTable& table);

}  // namespace mpmi
