#include "mpmi/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "mpmi/errors.hpp"
#include "mpmi/matrix_io.hpp"
#include "mpmi/spectral_filter.hpp"

namespace mpmi {

namespace {

Vector uniform_grid(std::size_t count) {
  Vector g(static_cast<Eigen::Index>(count));
  for (std::size_t i = 0; i < count; ++i) {
    g[static_cast<Eigen::Index>(i)] =
        -1.0 + 2.0 * static_cast<double>(i) / static_cast<double>(count - 1);
  }
  return g;
}

double aggregate(std::vector<double> values, Aggregation how) {
  if (how == Aggregation::mean) {
    double sum = 0.0;
    for (const double v : values) sum += v;
    return sum / static_cast<double>(values.size());
  }
  std::sort(values.begin(), values.end());
  const std::size_t mid = values.size() / 2;
  return values.size() % 2 ? values[mid] : 0.5 * (values[mid - 1] + values[mid]);
}

unsigned resolve_threads(unsigned requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("MPMI_THREADS")) {
    const long n = std::strtol(env, nullptr, 10);
    if (n > 0) return static_cast<unsigned>(n);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

std::string_view trim(std::string_view s) {
  const auto is_space = [](char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; };
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_list(std::string_view s) {
  std::vector<std::string_view> items;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= s.size(); ++i) {
    if (i == s.size() || s[i] == ',') {
      const auto item = trim(s.substr(start, i - start));
      if (!item.empty()) items.push_back(item);
      start = i + 1;
    }
  }
  return items;
}

std::uint64_t parse_u64(std::string_view s, const std::string& key) {
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw InputError("config_error", "invalid integer '" + std::string(s) + "' for " + key);
  }
  return v;
}

std::vector<std::uint64_t> parse_seeds(std::string_view value) {
  std::vector<std::uint64_t> seeds;
  for (const auto item : split_list(value)) {
    const auto dash = item.find('-');
    if (dash == std::string_view::npos) {
      seeds.push_back(parse_u64(item, "seeds"));
      continue;
    }
    const auto first = parse_u64(trim(item.substr(0, dash)), "seeds");
    const auto last = parse_u64(trim(item.substr(dash + 1)), "seeds");
    if (last < first) throw InputError("config_error", "empty seed range '" + std::string(item) + "'");
    for (auto s = first; s <= last; ++s) seeds.push_back(s);
  }
  return seeds;
}

RunRecord run_one(Method method, const SvdFactors& f, const PoissonProblem& p,
                  const Vector& u_delta, double delta_abs, const ExperimentConfig& config) {
  RunRecord rec;
  rec.method = method;
  try {
    SolveReport rep;
    switch (method) {
      case Method::mpmi: rep = mpmi_solve(f, u_delta, delta_abs); break;
      case Method::mpm:
        rep = mpm_solve(f, u_delta, config.mpm_h_rel * frobenius_norm(p.matrix));
        break;
      case Method::tsvd: rep = tsvd_solve(f, u_delta, tsvd_rank_by_discrepancy(f, u_delta, delta_abs)); break;
      case Method::tr:
        rep = tikhonov_solve(f, u_delta, discrepancy_alpha(f, u_delta, delta_abs, method, config.target));
        break;
      case Method::morozov:
        rep = morozov_variant_solve(f, u_delta,
                                    discrepancy_alpha(f, u_delta, delta_abs, method, config.target));
        break;
    }
    rec.ok = true;
    rec.accuracy = relative_error(rep.solution, p.z_bar);
    rec.condition_number = rep.condition_number;
    rec.parameter = rep.chosen_parameter;
    rec.effective_rank = rep.effective_rank;
    rec.jump = rep.jump_root;
  } catch (const Error& e) {
    rec.ok = false;
    rec.error = e.name();
  }
  return rec;
}

nlohmann::ordered_json optional_number(const std::optional<double>& v) {
  return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
}

std::string csv_number(const std::optional<double>& v) {
  return v ? io::format_double(*v) : std::string();
}

}  // namespace

PoissonProblem build_poisson(std::size_t m, std::size_t n, double h0) {
  if (m < 2 || n < 2) throw InputError("Poisson grids need at least two points");
  if (!(h0 > 0.0) || !std::isfinite(h0)) throw InputError("H0 must be positive");
  PoissonProblem p;
  p.m = m;
  p.n = n;
  p.h0 = h0;
  p.x_grid = uniform_grid(m);
  p.y_grid = uniform_grid(n);

  std::vector<double> entries(m * n);
  const double h2 = h0 * h0;
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double d = p.x_grid[static_cast<Eigen::Index>(i)] - p.y_grid[static_cast<Eigen::Index>(j)];
      entries[i * n + j] = 1.0 / (d * d + h2);
    }
  }
  p.matrix = DenseMatrix(m, n, std::move(entries));

  p.z_bar.resize(static_cast<Eigen::Index>(n));
  for (Eigen::Index j = 0; j < p.z_bar.size(); ++j) {
    const double y = p.y_grid[j];
    p.z_bar[j] = (1.0 - y * y) * std::sin(4.0 * std::numbers::pi * y);
  }
  p.u_bar = p.matrix.multiply(p.z_bar);
  return p;
}

Vector perturb_rhs(const Vector& u_bar, double delta_rel, std::uint64_t seed) {
  require_finite(u_bar, "exact right-hand side");
  if (!(delta_rel > 0.0 && delta_rel < 1.0)) throw InputError("relative noise level must lie in (0, 1)");
  const double norm = u_bar.norm();
  if (norm == 0.0) throw InputError("exact right-hand side is zero");

  std::mt19937_64 gen(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector e(u_bar.size());
  double e_norm = 0.0;
  // A zero draw has probability zero; keep drawing from the same stream if it happens.
  while (e_norm == 0.0) {
    for (Eigen::Index i = 0; i < e.size(); ++i) e[i] = normal(gen);
    e_norm = e.norm();
  }
  return u_bar + (delta_rel * norm / e_norm) * e;
}

double relative_error(const Vector& z, const Vector& z_bar) {
  if (z.size() != z_bar.size()) throw InputError("relative_error: dimension mismatch");
  const double denom = z_bar.norm();
  if (denom == 0.0) throw InputError("relative_error: reference vector is zero");
  return (z - z_bar).norm() / denom;
}

void ExperimentConfig::validate() const {
  if (m < 2 || n < 2) throw InputError("config_error", "m and n must be at least 2");
  if (!(h0 > 0.0)) throw InputError("config_error", "h0 must be positive");
  if (deltas.empty()) throw InputError("config_error", "deltas must not be empty");
  for (const double d : deltas) {
    if (!(d > 0.0 && d < 1.0)) throw InputError("config_error", "every delta must lie in (0, 1)");
  }
  if (seeds.empty()) throw InputError("config_error", "at least one seed is required");
  if (methods.empty()) throw InputError("config_error", "methods must not be empty");
  if (!(mpm_h_rel > 0.0)) throw InputError("config_error", "mpm_h must be positive");
}

ExperimentConfig desk_scale_config() {
  ExperimentConfig c;
  for (std::uint64_t s = 1; s <= 20; ++s) c.seeds.push_back(s);
  return c;
}

void use_full_scale(ExperimentConfig& config) {
  config.m = kFullRows;
  config.n = kFullCols;
}

ExperimentConfig parse_config(std::istream& in) {
  ExperimentConfig c = desk_scale_config();
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view body = line;
    if (const auto hash = body.find('#'); hash != std::string_view::npos) body = body.substr(0, hash);
    body = trim(body);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string_view::npos) {
      throw InputError("config_error", "line " + std::to_string(line_no) + ": expected key = value");
    }
    const std::string key(trim(body.substr(0, eq)));
    const std::string_view value = trim(body.substr(eq + 1));

    if (key == "m") c.m = parse_u64(value, key);
    else if (key == "n") c.n = parse_u64(value, key);
    else if (key == "h0") c.h0 = io::parse_double(value);
    else if (key == "deltas") {
      c.deltas.clear();
      for (const auto item : split_list(value)) c.deltas.push_back(io::parse_double(item));
    } else if (key == "seeds") c.seeds = parse_seeds(value);
    else if (key == "methods") {
      c.methods.clear();
      for (const auto item : split_list(value)) c.methods.push_back(parse_method(item));
    } else if (key == "aggregation") {
      if (value == "median") c.aggregation = Aggregation::median;
      else if (value == "mean") c.aggregation = Aggregation::mean;
      else throw InputError("config_error", "aggregation must be median or mean");
    } else if (key == "scale") {
      if (value == "full") use_full_scale(c);
      else if (value != "desk") throw InputError("config_error", "scale must be desk or full");
    } else if (key == "target") {
      if (value == "with_mu") c.target = DiscrepancyTarget::with_mu;
      else if (value == "absolute") c.target = DiscrepancyTarget::absolute;
      else throw InputError("config_error", "target must be with_mu or absolute");
    } else if (key == "mpm_h") c.mpm_h_rel = io::parse_double(value);
    else if (key == "curve_samples") c.curve_samples = parse_u64(value, key);
    else if (key == "threads") c.threads = static_cast<unsigned>(parse_u64(value, key));
    else throw InputError("config_error", "unknown key '" + key + "'");
  }
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("io_error", "cannot open '" + path.string() + "'");
  return parse_config(in);
}

double TableRow::jump_fraction() const noexcept {
  const std::size_t ok = runs - failures;
  return ok ? static_cast<double>(jumps) / static_cast<double>(ok) : 0.0;
}

const TableRow& ExperimentTable::row(Method method, double delta) const {
  for (const auto& r : rows) {
    if (r.method == method && r.delta == delta) return r;
  }
  throw InputError("no table row for " + std::string(to_string(method)) + " at delta " +
                   io::format_double(delta));
}

ExperimentTable run_experiment(const ExperimentConfig& config) {
  config.validate();
  const PoissonProblem problem = build_poisson(config.m, config.n, config.h0);
  return run_experiment(config, problem, svd(problem.matrix));
}

ExperimentTable run_experiment(const ExperimentConfig& config, const PoissonProblem& problem,
                               const SvdFactors& factors) {
  config.validate();
  const std::size_t n_delta = config.deltas.size();
  const std::size_t n_seed = config.seeds.size();
  const std::size_t n_method = config.methods.size();
  const double u_norm = problem.u_bar.norm();

  ExperimentTable table;
  table.config = config;
  table.numerical_rank = factors.rank();
  table.exact_condition = spectral_cond(factors);
  table.raw_condition = factors.sigma[0] / factors.sigma[factors.sigma.size() - 1];

  // Slot (method, delta, seed) is written by exactly one task.
  table.runs.resize(n_method * n_delta * n_seed);
  std::vector<std::optional<CurveDump>> curves(n_delta);
  const auto slot = [&](std::size_t mi, std::size_t di, std::size_t si) {
    return (mi * n_delta + di) * n_seed + si;
  };

  std::atomic<std::size_t> next{0};
  const std::size_t n_tasks = n_delta * n_seed;
  const auto worker = [&] {
    for (std::size_t task = next++; task < n_tasks; task = next++) {
      const std::size_t di = task / n_seed;
      const std::size_t si = task % n_seed;
      const double delta = config.deltas[di];
      const std::uint64_t seed = config.seeds[si];
      const Vector u_delta = perturb_rhs(problem.u_bar, delta, seed);
      const double delta_abs = delta * u_norm;
      for (std::size_t mi = 0; mi < n_method; ++mi) {
        RunRecord rec = run_one(config.methods[mi], factors, problem, u_delta, delta_abs, config);
        rec.delta = delta;
        rec.seed = seed;
        table.runs[slot(mi, di, si)] = std::move(rec);
      }
      if (si == 0 && config.curve_samples > 0) {
        try {
          const MpmiFamily family = mpmi_family(factors);
          HDeltaSolution sol = solve_h_delta(factors, u_delta, delta_abs, family, config.curve_samples);
          curves[di] = CurveDump{delta, seed, sol.h, std::move(sol.curve)};
        } catch (const Error&) {
          // recorded as a failed MPMI run already
        }
      }
    }
  };
  {
    const unsigned n_threads =
        std::min<unsigned>(resolve_threads(config.threads), static_cast<unsigned>(n_tasks));
    std::vector<std::jthread> pool;
    for (unsigned t = 1; t < n_threads; ++t) pool.emplace_back(worker);
    worker();
  }

  for (std::size_t mi = 0; mi < n_method; ++mi) {
    for (std::size_t di = 0; di < n_delta; ++di) {
      TableRow row;
      row.method = config.methods[mi];
      row.delta = config.deltas[di];
      std::vector<double> acc, cond, param, rank;
      for (std::size_t si = 0; si < n_seed; ++si) {
        const RunRecord& rec = table.runs[slot(mi, di, si)];
        ++row.runs;
        if (!rec.ok) {
          ++row.failures;
          continue;
        }
        if (rec.jump) ++row.jumps;
        acc.push_back(rec.accuracy);
        cond.push_back(rec.condition_number);
        param.push_back(rec.parameter);
        rank.push_back(static_cast<double>(rec.effective_rank));
      }
      if (!acc.empty()) {
        row.accuracy = aggregate(acc, config.aggregation);
        row.condition_number = aggregate(cond, config.aggregation);
        row.parameter = aggregate(param, config.aggregation);
        row.effective_rank = aggregate(rank, config.aggregation);
      }
      table.rows.push_back(row);
    }
  }
  for (auto& c : curves) {
    if (c) table.curves.push_back(std::move(*c));
  }
  return table;
}

void write_table_csv(std::ostream& out, const ExperimentTable& table) {
  out << "method,delta,accuracy,condition_number,jump_fraction,parameter,effective_rank,runs,failures\n";
  for (const auto& r : table.rows) {
    out << to_string(r.method) << ',' << io::format_double(r.delta) << ',' << csv_number(r.accuracy)
        << ',' << csv_number(r.condition_number) << ',' << io::format_double(r.jump_fraction())
        << ',' << csv_number(r.parameter) << ',' << csv_number(r.effective_rank) << ',' << r.runs
        << ',' << r.failures << '\n';
  }
}

void write_detail_json(std::ostream& out, const ExperimentTable& table) {
  using nlohmann::ordered_json;
  const ExperimentConfig& c = table.config;
  ordered_json doc;
  ordered_json cfg;
  cfg["m"] = c.m;
  cfg["n"] = c.n;
  cfg["h0"] = c.h0;
  cfg["deltas"] = c.deltas;
  cfg["seeds"] = c.seeds;
  ordered_json methods = ordered_json::array();
  for (const auto m : c.methods) methods.push_back(std::string(to_string(m)));
  cfg["methods"] = methods;
  cfg["aggregation"] = c.aggregation == Aggregation::median ? "median" : "mean";
  cfg["target"] = c.target == DiscrepancyTarget::with_mu ? "with_mu" : "absolute";
  cfg["mpm_h"] = c.mpm_h_rel;
  doc["config"] = cfg;

  doc["matrix"] = {{"numerical_rank", table.numerical_rank},
                   {"condition_number", table.exact_condition},
                   {"raw_condition_number", table.raw_condition}};

  ordered_json rows = ordered_json::array();
  for (const auto& r : table.rows) {
    rows.push_back({{"method", std::string(to_string(r.method))},
                    {"delta", r.delta},
                    {"accuracy", optional_number(r.accuracy)},
                    {"condition_number", optional_number(r.condition_number)},
                    {"jump_fraction", r.jump_fraction()},
                    {std::string(parameter_name(r.method)), optional_number(r.parameter)},
                    {"effective_rank", optional_number(r.effective_rank)},
                    {"runs", r.runs},
                    {"failures", r.failures}});
  }
  doc["table"] = rows;

  ordered_json runs = ordered_json::array();
  for (const auto& rec : table.runs) {
    ordered_json j{{"method", std::string(to_string(rec.method))},
                   {"delta", rec.delta},
                   {"seed", rec.seed},
                   {"ok", rec.ok}};
    if (rec.ok) {
      j["accuracy"] = rec.accuracy;
      j["condition_number"] = rec.condition_number;
      j[std::string(parameter_name(rec.method))] = rec.parameter;
      j["effective_rank"] = rec.effective_rank;
      j["jump"] = rec.jump;
    } else {
      j["error"] = rec.error;
    }
    runs.push_back(std::move(j));
  }
  doc["runs"] = runs;
  out << doc.dump(2) << '\n';
}

void write_curve_csv(std::ostream& out, const CurveDump& dump) {
  out << "# delta=" << io::format_double(dump.delta) << " seed=" << dump.seed
      << " h_delta=" << io::format_double(dump.h_delta)
      << " mu_delta_sq=" << io::format_double(dump.curve.mu_delta_sq)
      << " u_norm_sq=" << io::format_double(dump.curve.u_norm_sq) << '\n';
  out << "h,beta_sq\n";
  for (const auto& s : dump.curve.samples) {
    out << io::format_double(s.h) << ',' << io::format_double(s.beta_sq) << '\n';
  }
  out << "breakpoint,left,right\n";
  for (const auto& j : dump.curve.jumps) {
    out << io::format_double(j.h) << ',' << io::format_double(j.left) << ','
        << io::format_double(j.right) << '\n';
  }
}

void write_experiment_outputs(const std::filesystem::path& dir, const ExperimentTable& table) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw InputError("io_error", "cannot create '" + dir.string() + "': " + ec.message());
  const auto open = [](const std::filesystem::path& p) {
    std::ofstream out(p);
    if (!out) throw InputError("io_error", "cannot write '" + p.string() + "'");
    return out;
  };
  {
    auto out = open(dir / "table.csv");
    write_table_csv(out, table);
  }
  {
    auto out = open(dir / "detail.json");
    write_detail_json(out, table);
  }
  for (const auto& c : table.curves) {
    auto out = open(dir / ("beta_curve_delta_" + io::format_double(c.delta) + ".csv"));
    write_curve_csv(out, c);
  }
}

}  // namespace mpmi
