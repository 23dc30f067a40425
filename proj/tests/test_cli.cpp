#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>
#include <json.hpp>

#include "mpmi/cli.hpp"
#include "mpmi/experiments.hpp"
#include "mpmi/matrix_io.hpp"

namespace {

using namespace mpmi;
namespace fs = std::filesystem;
using nlohmann::json;

struct Outcome {
  int code = 0;
  std::string out;
  std::string err;
};

Outcome run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "mpmi");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

class CliTest : public ::testing::Test {
protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("mpmi_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string write(const std::string& name, const DenseMatrix& a) {
    const auto p = dir_ / name;
    io::write_matrix_file(p, a);
    return p.string();
  }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  fs::path dir_;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

TEST_F(CliTest, SolveMpmiMatchesDirectSolve) {
  const DenseMatrix a(3, 3, {4, 1, 0, 1, 3, 1, 0, 1, 2});
  const std::string m = write("a.csv", a);
  const std::string u = write("u.csv", DenseMatrix(3, 1, {1, 2, 3}));
  const Outcome o = run_cli({"solve", "--matrix", m, "--rhs", u, "--method", "mpmi", "--delta-rel", "1e-10"});
  ASSERT_EQ(o.code, 0) << o.err;
  const json r = json::parse(o.out);
  Vector rhs(3);
  rhs << 1, 2, 3;
  const Vector exact = a.eigen().partialPivLu().solve(rhs);
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(r["solution"][i].get<double>(), exact[i], 1e-6);
  EXPECT_EQ(r["method"], "mpmi");
  for (const char* key : {"h", "effective_rank", "condition_number", "jump_root", "residual"}) {
    EXPECT_TRUE(r.contains(key)) << key;
  }
}

TEST_F(CliTest, SolveTsvdFullRankIsPseudoinverse) {
  const DenseMatrix a(3, 2, {1, 2, 3, 4, 5, 7});
  const std::string m = write("a.mtx", a);
  const std::string u = write("u.csv", DenseMatrix(1, 3, {1, 0, 1}));
  const Outcome o = run_cli({"solve", "--matrix", m, "--rhs", u, "--method", "tsvd", "--rank", "2"});
  ASSERT_EQ(o.code, 0) << o.err;
  const json r = json::parse(o.out);
  Vector rhs(3);
  rhs << 1, 0, 1;
  const Vector expected = a.eigen().completeOrthogonalDecomposition().pseudoInverse() * rhs;
  for (int i = 0; i < 2; ++i) EXPECT_NEAR(r["solution"][i].get<double>(), expected[i], 1e-12);
  EXPECT_EQ(r["rank"], 2);
}

TEST_F(CliTest, SolveOnModelProblemReportsMpmiFields) {
  const PoissonProblem p = build_poisson(kDeskRows, kDeskCols, 0.1);
  const std::string m = write("poisson.csv", p.matrix);
  const Vector u = perturb_rhs(p.u_bar, 0.05, 1);
  const std::string rhs = path("u.csv");
  io::write_vector_file(rhs, u);
  const std::string out = path("report.json");
  const Outcome o = run_cli({"solve", "--matrix", m, "--rhs", rhs, "--method", "mpmi", "--delta-rel", "0.05",
                             "--out", out});
  ASSERT_EQ(o.code, 0) << o.err;
  const json r = json::parse(slurp(out));
  EXPECT_GT(r["h"].get<double>(), 0.0);
  EXPECT_GT(r["effective_rank"].get<int>(), 0);
  EXPECT_GE(r["condition_number"].get<double>(), 1.0);
  EXPECT_TRUE(r["jump_root"].is_boolean());
  EXPECT_EQ(r["solution"].size(), kDeskCols);
}

TEST_F(CliTest, LargeSolutionGoesToSidecar) {
  const std::size_t n = 1001;
  std::vector<double> entries(n, 0.0);
  entries[0] = 1.0;
  const std::string m = write("a.csv", DenseMatrix(1, n, entries));
  const std::string u = write("u.csv", DenseMatrix(1, 1, {2.0}));
  const std::string out = path("rep.json");
  const Outcome o = run_cli({"solve", "--matrix", m, "--rhs", u, "--method", "tr", "--alpha", "1", "--out", out});
  ASSERT_EQ(o.code, 0) << o.err;
  const json r = json::parse(slurp(out));
  ASSERT_TRUE(r.contains("solution_file"));
  const Vector z = io::read_vector_file(r["solution_file"].get<std::string>());
  EXPECT_EQ(z.size(), static_cast<Eigen::Index>(n));
  EXPECT_DOUBLE_EQ(z[0], 1.0);
}

TEST_F(CliTest, SolveFlagValidation) {
  const std::string m = write("a.csv", DenseMatrix::identity(2));
  const std::string u = write("u.csv", DenseMatrix(2, 1, {1, 1}));
  const std::vector<std::vector<std::string>> bad = {
      {"--method", "mpmi", "--alpha", "1"},
      {"--method", "mpmi"},
      {"--method", "mpmi", "--delta-rel", "0.1", "--delta-abs", "0.1"},
      {"--method", "tsvd", "--h", "0.1"},
      {"--method", "mpm", "--delta-rel", "0.1"},
      {"--method", "tr", "--rank", "1"},
      {"--method", "nope", "--delta-rel", "0.1"},
      {"--method", "mpmi", "--delta-rel", "-0.1"},
  };
  for (auto args : bad) {
    args.insert(args.begin(), {"solve", "--matrix", m, "--rhs", u});
    const Outcome o = run_cli(args);
    EXPECT_EQ(o.code, cli::kExitInputError) << args[6];
    EXPECT_EQ(o.err.rfind("error: ", 0), 0u) << o.err;
  }
}

TEST_F(CliTest, SolverErrorsExitThree) {
  const std::string m = write("a.csv", DenseMatrix::identity(1));
  const std::string u = write("u.csv", DenseMatrix(1, 1, {2.0}));
  const Outcome o = run_cli({"solve", "--matrix", m, "--rhs", u, "--method", "mpmi", "--delta-abs", "3"});
  EXPECT_EQ(o.code, cli::kExitSolverError);
  EXPECT_NE(o.err.find("error: noise_dominates_signal: "), std::string::npos);
  const Outcome e = run_cli({"pinv", "--matrix", m, "--h", "1.5"});
  EXPECT_EQ(e.code, cli::kExitSolverError);
  EXPECT_NE(e.err.find("error_level_exceeds_matrix_energy"), std::string::npos);
}

TEST_F(CliTest, InputErrorsExitTwo) {
  const std::string bad = path("bad.csv");
  std::ofstream(bad) << "2,2\n1,2\n3\n";
  EXPECT_EQ(run_cli({"svd-report", "--matrix", bad}).code, cli::kExitInputError);
  EXPECT_EQ(run_cli({"svd-report", "--matrix", path("missing.csv")}).code, cli::kExitInputError);
  EXPECT_EQ(run_cli({}).code, cli::kExitInputError);
  EXPECT_EQ(run_cli({"frobnicate"}).code, cli::kExitInputError);
  EXPECT_EQ(run_cli({"--help"}).code, cli::kExitOk);
  const std::string m = write("a.csv", DenseMatrix::identity(2));
  const std::string u = write("u.csv", DenseMatrix(3, 1, {1, 1, 1}));
  EXPECT_EQ(run_cli({"solve", "--matrix", m, "--rhs", u, "--method", "tsvd", "--rank", "1"}).code,
            cli::kExitInputError);
}

TEST_F(CliTest, PinvIdentityAndForcedJump) {
  const std::string id = write("id.csv", DenseMatrix::identity(3));
  const Outcome o = run_cli({"pinv", "--matrix", id, "--h", "1e-12"});
  ASSERT_EQ(o.code, 0) << o.err;
  const json r = json::parse(o.out);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) EXPECT_NEAR(r["pinv"][i][j].get<double>(), i == j ? 1.0 : 0.0, 1e-10);
  EXPECT_TRUE(r["within_ball"].get<bool>());

  const std::string one = write("one.csv", DenseMatrix::identity(1));
  const std::string out = path("pinv.csv");
  const Outcome j = run_cli({"pinv", "--matrix", one, "--h", "0.8", "--out", out, "--emit-matrix"});
  ASSERT_EQ(j.code, 0) << j.err;
  const json s = json::parse(j.out);
  EXPECT_TRUE(s["jump"].get<bool>());
  EXPECT_EQ(s["lambda"].get<double>(), 27.0 / 16.0);
  EXPECT_EQ(s["rank"], 1);
  EXPECT_TRUE(s["within_ball"].get<bool>());
  EXPECT_NEAR(io::read_matrix_file(out)(0, 0), 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(io::read_matrix_file(path("pinv.approx.csv"))(0, 0), 1.5, 1e-15);
}

TEST_F(CliTest, SvdReport) {
  const double d[] = {3.0, 2.0, 1.0};
  const std::string m = write("d.csv", DenseMatrix::diagonal(d));
  const Outcome o = run_cli({"svd-report", "--matrix", m});
  ASSERT_EQ(o.code, 0) << o.err;
  EXPECT_NE(o.out.find("condition_number=3\n"), std::string::npos);
  EXPECT_NE(o.out.find("numerical_rank=3"), std::string::npos);
  EXPECT_NE(o.out.find("k,sigma\n1,3\n2,2\n3,1\n"), std::string::npos);

  const PoissonProblem p = build_poisson(kDeskRows, kDeskCols, 0.1);
  const std::string pm = write("poisson.mtx", p.matrix);
  const std::string out = path("report.csv");
  ASSERT_EQ(run_cli({"svd-report", "--matrix", pm, "--out", out}).code, 0);
  std::istringstream lines(slurp(out));
  std::string line;
  std::getline(lines, line);
  std::getline(lines, line);
  double prev = std::numeric_limits<double>::infinity();
  int rows = 0;
  while (std::getline(lines, line)) {
    const double s = io::parse_double(line.substr(line.find(',') + 1));
    EXPECT_LE(s, prev);
    prev = s;
    ++rows;
  }
  EXPECT_EQ(rows, static_cast<int>(kDeskRows));
}

TEST_F(CliTest, ExperimentIsReproducible) {
  const std::string conf = path("small.conf");
  std::ofstream(conf) << "m = 30\nn = 31\ndeltas = 0.01, 0.1\nseeds = 1-4\nmethods = mpmi\ncurve_samples = 20\n";
  const Outcome a = run_cli({"experiment", "--config", conf, "--out-dir", path("a")});
  const Outcome b = run_cli({"experiment", "--config", conf, "--out-dir", path("b")});
  ASSERT_EQ(a.code, 0) << a.err;
  EXPECT_EQ(a.out, b.out);
  for (const char* f : {"table.csv", "detail.json", "beta_curve_delta_0.1.csv"}) {
    EXPECT_EQ(slurp(dir_ / "a" / f), slurp(dir_ / "b" / f)) << f;
  }
  EXPECT_EQ(slurp(dir_ / "a" / "table.csv"), a.out);

  const Outcome shifted = run_cli({"experiment", "--config", conf, "--out-dir", path("c"), "--seed", "100"});
  ASSERT_EQ(shifted.code, 0);
  const json detail = json::parse(slurp(dir_ / "c" / "detail.json"));
  EXPECT_EQ(detail["config"]["seeds"], json({100, 101, 102, 103}));
}

TEST_F(CliTest, ExperimentConfigErrors) {
  const std::string conf = path("bad.conf");
  std::ofstream(conf) << "deltas = 2\n";
  EXPECT_EQ(run_cli({"experiment", "--config", conf, "--out-dir", path("o")}).code, cli::kExitInputError);
  const std::string failing = path("failing.conf");
  std::ofstream(failing) << "m = 20\nn = 21\ndeltas = 0.1\nseeds = 1\nmethods = mpm\nmpm_h = 1.5\n";
  EXPECT_EQ(run_cli({"experiment", "--config", failing, "--out-dir", path("f")}).code, cli::kExitSolverError);
}

TEST_F(CliTest, PrintedNumbersRoundTrip) {
  const DenseMatrix a(2, 2, {0.1, 1.0 / 3.0, 2.0 / 7.0, 5.0});
  const std::string m = write("a.csv", a);
  const DenseMatrix back = io::read_matrix_file(m);
  for (std::size_t i = 0; i < 4; ++i) EXPECT_EQ(back.entries()[i], a.entries()[i]);
  const Outcome o = run_cli({"pinv", "--matrix", m, "--h", "0.01"});
  ASSERT_EQ(o.code, 0);
  const json r = json::parse(o.out);
  const double lambda = r["lambda"].get<double>();
  EXPECT_EQ(json::parse(json(lambda).dump()).get<double>(), lambda);
}

}  // namespace
