#include "mpmi/cli.hpp"

#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "mpmi/baselines.hpp"
#include "mpmi/errors.hpp"
#include "mpmi/experiments.hpp"
#include "mpmi/matrix_io.hpp"
#include "mpmi/mpmi_solver.hpp"
#include "mpmi/spectral_filter.hpp"
#include "mpmi/svd.hpp"

namespace mpmi::cli {

namespace {

using nlohmann::ordered_json;

// Solutions longer than this go to a sidecar CSV when an output file is given.
constexpr Eigen::Index kInlineSolutionLimit = 1000;

struct SolveArgs {
  std::string matrix;
  std::string rhs;
  std::string method;
  std::string out;
  double delta_rel = 0.0;
  double delta_abs = 0.0;
  double alpha = 0.0;
  double h = 0.0;
  std::size_t rank = 0;
};

struct PinvArgs {
  std::string matrix;
  std::string out;
  double h = 0.0;
  bool emit_matrix = false;
};

struct SvdReportArgs {
  std::string matrix;
  std::string out;
};

struct ExperimentArgs {
  std::string config;
  std::string out_dir;
  bool full_scale = false;
  std::optional<std::uint64_t> seed;
};

ordered_json matrix_json(const DenseMatrix& a) {
  ordered_json rows = ordered_json::array();
  for (std::size_t i = 0; i < a.rows(); ++i) {
    ordered_json row = ordered_json::array();
    for (std::size_t j = 0; j < a.cols(); ++j) row.push_back(a(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

ordered_json vector_json(const Vector& v) {
  ordered_json arr = ordered_json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

void emit(const ordered_json& doc, const std::string& path, std::ostream& out) {
  if (path.empty()) {
    out << doc.dump(2) << '\n';
    return;
  }
  std::ofstream file(path);
  if (!file) throw InputError("io_error", "cannot write '" + path + "'");
  file << doc.dump(2) << '\n';
}

std::filesystem::path sidecar(const std::string& out, const char* suffix) {
  std::filesystem::path p(out);
  p.replace_extension(suffix);
  return p;
}

double nonzero_spread(const Vector& s) {
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

int cmd_solve(const SolveArgs& args, const CLI::App& sub, std::ostream& out) {
  const Method method = parse_method(args.method);
  const bool has_delta_rel = sub.count("--delta-rel") > 0;
  const bool has_delta_abs = sub.count("--delta-abs") > 0;
  const bool has_alpha = sub.count("--alpha") > 0;
  const bool has_rank = sub.count("--rank") > 0;
  const bool has_h = sub.count("--h") > 0;
  const int n_params = has_delta_rel + has_delta_abs + has_alpha + has_rank + has_h;
  if (n_params != 1) {
    throw InputError("usage_error", "solve needs exactly one of --delta-rel, --delta-abs, --alpha, --rank, --h");
  }
  const bool has_delta = has_delta_rel || has_delta_abs;
  const bool consistent = (method == Method::mpmi && has_delta) ||
                          (method == Method::mpm && has_h) ||
                          (method == Method::tsvd && (has_delta || has_rank)) ||
                          ((method == Method::tr || method == Method::morozov) && (has_delta || has_alpha));
  if (!consistent) {
    throw InputError("usage_error", "parameter flag does not fit method '" + args.method + "'");
  }

  const DenseMatrix a = io::read_matrix_file(args.matrix);
  const Vector u = io::read_vector_file(args.rhs);
  if (static_cast<std::size_t>(u.size()) != a.rows()) {
    throw InputError("right-hand side has length " + std::to_string(u.size()) + ", matrix has " +
                     std::to_string(a.rows()) + " rows");
  }
  // The exact right-hand side is unknown here, so relative noise is scaled by |u_delta|.
  const double delta_abs = has_delta_rel ? args.delta_rel * u.norm() : args.delta_abs;
  if (has_delta && !(delta_abs > 0.0)) throw InputError("noise level must be positive");

  const SvdFactors f = svd(a);
  SolveReport rep;
  switch (method) {
    case Method::mpmi: rep = mpmi_solve(f, u, delta_abs); break;
    case Method::mpm: rep = mpm_solve(f, u, args.h); break;
    case Method::tsvd:
      rep = tsvd_solve(f, u, has_rank ? args.rank : tsvd_rank_by_discrepancy(f, u, delta_abs));
      break;
    case Method::tr:
      rep = tikhonov_solve(f, u, has_alpha ? args.alpha : discrepancy_alpha(f, u, delta_abs, method));
      break;
    case Method::morozov:
      rep = morozov_variant_solve(f, u,
                                  has_alpha ? args.alpha : discrepancy_alpha(f, u, delta_abs, method));
      break;
  }

  ordered_json doc;
  doc["method"] = std::string(to_string(method));
  if (method == Method::tsvd) doc["rank"] = rep.effective_rank;
  else doc[std::string(parameter_name(method))] = rep.chosen_parameter;
  if (has_delta) doc["delta_abs"] = delta_abs;
  doc["effective_rank"] = rep.effective_rank;
  doc["numerical_rank"] = rep.numerical_rank;
  doc["condition_number"] = rep.condition_number;
  doc["matrix_condition_number"] = spectral_cond(f);
  doc["residual"] = rep.residual;
  doc["mu_delta"] = rep.mu_delta;
  doc["jump_root"] = rep.jump_root;
  if (!args.out.empty() && rep.solution.size() > kInlineSolutionLimit) {
    const auto path = sidecar(args.out, ".solution.csv");
    io::write_vector_file(path, rep.solution);
    doc["solution_file"] = path.string();
  } else {
    doc["solution"] = vector_json(rep.solution);
  }
  emit(doc, args.out, out);
  return kExitOk;
}

int cmd_pinv(const PinvArgs& args, std::ostream& out) {
  if (!(args.h > 0.0)) throw InputError("--h must be positive");
  const DenseMatrix a = io::read_matrix_file(args.matrix);
  const SvdFactors f = svd(a);
  const MpmResult res = mpm_pseudoinverse(f, args.h);

  ordered_json doc;
  doc["h"] = args.h;
  doc["lambda"] = res.spectrum.lambda_chosen;
  doc["jump"] = res.spectrum.jump;
  doc["rank"] = res.spectrum.rank();
  doc["distance"] = res.distance;
  doc["within_ball"] = res.distance <= args.h + 1e-10 * frobenius_norm(a);
  doc["condition_number"] = nonzero_spread(res.spectrum.filtered_sigma);
  doc["filtered_sigma"] = vector_json(res.spectrum.filtered_sigma);
  if (args.out.empty()) {
    doc["pinv"] = matrix_json(res.pinv);
    if (args.emit_matrix) doc["approx"] = matrix_json(res.approx);
  } else {
    io::write_matrix_file(args.out, res.pinv);
    doc["pinv_file"] = args.out;
    if (args.emit_matrix) {
      const auto path = sidecar(args.out, ".approx.csv");
      io::write_matrix_file(path, res.approx);
      doc["approx_file"] = path.string();
    }
  }
  out << doc.dump(2) << '\n';
  return kExitOk;
}

int cmd_svd_report(const SvdReportArgs& args, std::ostream& out) {
  const DenseMatrix a = io::read_matrix_file(args.matrix);
  const SvdFactors f = svd(a);
  std::ofstream file;
  if (!args.out.empty()) {
    file.open(args.out);
    if (!file) throw InputError("io_error", "cannot write '" + args.out + "'");
  }
  std::ostream& sink = args.out.empty() ? out : file;
  sink << "# rows=" << a.rows() << " cols=" << a.cols()
       << " frobenius_norm=" << io::format_double(frobenius_norm(a))
       << " numerical_rank=" << f.rank()
       << " rank_tolerance=" << io::format_double(f.rank_tolerance)
       << " condition_number=" << io::format_double(spectral_cond(f)) << '\n';
  sink << "k,sigma\n";
  for (Eigen::Index k = 0; k < f.sigma.size(); ++k) {
    sink << (k + 1) << ',' << io::format_double(f.sigma[k]) << '\n';
  }
  return kExitOk;
}

int cmd_experiment(const ExperimentArgs& args, std::ostream& out) {
  ExperimentConfig config = load_config(args.config);
  if (args.full_scale) use_full_scale(config);
  if (args.seed) {
    for (std::size_t i = 0; i < config.seeds.size(); ++i) config.seeds[i] = *args.seed + i;
  }
  const ExperimentTable table = run_experiment(config);
  write_experiment_outputs(args.out_dir, table);
  write_table_csv(out, table);

  for (const auto& rec : table.runs) {
    if (rec.ok) return kExitOk;
  }
  return kExitSolverError;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Stable solution of ill-conditioned linear systems with minimal pseudoinverse matrices"};
  app.set_help_flag("--help", "Print this help message and exit");
  app.require_subcommand(1);
  app.set_version_flag("--version", "mpmi 1.0.0");

  SolveArgs solve;
  auto* solve_cmd = app.add_subcommand("solve", "Solve A z = u_delta with a regularizing method");
  solve_cmd->add_option("--matrix", solve.matrix, "Matrix file (CSV or MatrixMarket)")->required();
  solve_cmd->add_option("--rhs", solve.rhs, "Right-hand side vector file")->required();
  solve_cmd->add_option("--method", solve.method, "mpmi | mpm | tsvd | tr | morozov")->required();
  solve_cmd->add_option("--delta-rel", solve.delta_rel,
                        "Relative noise level; converted with |u_delta| since the exact u is unknown");
  solve_cmd->add_option("--delta-abs", solve.delta_abs, "Absolute noise level |u_delta - u|");
  solve_cmd->add_option("--alpha", solve.alpha, "Regularization parameter (tr, morozov)");
  solve_cmd->add_option("--rank", solve.rank, "Truncation rank (tsvd)");
  solve_cmd->add_option("--h", solve.h, "Matrix error level (mpm)");
  solve_cmd->add_option("--out", solve.out, "JSON report path (default: standard output)");

  PinvArgs pinv;
  auto* pinv_cmd = app.add_subcommand("pinv", "Minimal pseudoinverse of a matrix known to within h");
  pinv_cmd->add_option("--matrix", pinv.matrix, "Matrix file")->required();
  pinv_cmd->add_option("--h", pinv.h, "Matrix error level (Frobenius)")->required();
  pinv_cmd->add_option("--out", pinv.out, "Pseudoinverse output file (.csv or .mtx)");
  pinv_cmd->add_flag("--emit-matrix", pinv.emit_matrix, "Also write the approximating matrix");

  SvdReportArgs report;
  auto* svd_cmd = app.add_subcommand("svd-report", "Singular values, rank and condition number");
  svd_cmd->add_option("--matrix", report.matrix, "Matrix file")->required();
  svd_cmd->add_option("--out", report.out, "CSV output path (default: standard output)");

  ExperimentArgs experiment;
  std::uint64_t seed = 0;
  auto* exp_cmd = app.add_subcommand(
      "experiment", "Model-problem comparison table; relative noise is scaled by the exact |u|. "
                    "Worker threads: MPMI_THREADS.");
  exp_cmd->add_option("--config", experiment.config, "key = value config file")->required();
  exp_cmd->add_option("--out-dir", experiment.out_dir, "Output directory")->required();
  exp_cmd->add_flag("--full-scale", experiment.full_scale, "Use the 1991 x 2001 grid");
  auto* seed_opt = exp_cmd->add_option("--seed", seed, "Renumber the configured seeds to start here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInputError;
  }
  if (seed_opt->count() > 0) experiment.seed = seed;

  try {
    if (*solve_cmd) return cmd_solve(solve, *solve_cmd, out);
    if (*pinv_cmd) return cmd_pinv(pinv, out);
    if (*svd_cmd) return cmd_svd_report(report, out);
    if (*exp_cmd) return cmd_experiment(experiment, out);
  } catch (const InputError& e) {
    err << "error: " << e.name() << ": " << e.what() << '\n';
    return kExitInputError;
  } catch (const SolverError& e) {
    err << "error: " << e.name() << ": " << e.what() << '\n';
    return kExitSolverError;
  } catch (const std::exception& e) {
    err << "error: internal: " << e.what() << '\n';
    return kExitSolverError;
  }
  return kExitInputError;
}

}  // namespace mpmi::cli
