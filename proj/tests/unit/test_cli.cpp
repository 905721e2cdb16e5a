#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "commands.hpp"
#include "config.hpp"
#include "tmcmc/diagnostics.hpp"

using namespace tmcmc;
using namespace tmcmc::cli;
namespace fs = std::filesystem;

namespace {

class TempDir {
 public:
  TempDir() {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    path_ = fs::temp_directory_path() / ("tmcmc_cli_" + std::string(info->test_suite_name()) + "_" + info->name());
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

RunConfig parse(const std::string& text) {
  std::istringstream in(text);
  return parse_run_config(IniDocument::parse(in));
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream f(p);
  f << text;
}

std::string banana_config(const fs::path& out, int replicates) {
  return "[run]\nreplicates = " + std::to_string(replicates) + "\nseed = 17\noutput = " + out.string() +
         "\n[problem]\nname = banana\n[proposal]\ntype = rw\n[basis]\ndegree = 2\n"
         "[chain]\nsteps = 2e4\nburn_in = 2000\nadapt_interval = 1000\n";
}

}  // namespace

TEST(Config, DefaultsAndOverrides) {
  const auto cfg = parse(
      "# comment\n[run]\nseed = 5\nreplicates = 2\n[problem]\nname = bod\n"
      "[proposal]\ntype = drl\nsigma1 = 0.8 ; trailing\nsigma2 = 0.2\n"
      "[chain]\nsteps = 7.5e4\nburn_in = 1e4\ntune = off\n[basis]\ndegree = 3\ntype = nomixed\n"
      "[map]\nk_r = 1e-3\nradius = inf\n");
  EXPECT_EQ(cfg.seed, 5u);
  EXPECT_EQ(cfg.replicates, 2);
  EXPECT_EQ(cfg.problem.name, "bod");
  EXPECT_EQ(cfg.chain.steps, 75000);
  EXPECT_EQ(cfg.chain.burn_in, 10000);
  EXPECT_FALSE(cfg.chain.tune);
  EXPECT_EQ(cfg.chain.basis.degree, 3);
  EXPECT_EQ(cfg.chain.basis.type, SetType::kNoMixed);
  EXPECT_DOUBLE_EQ(cfg.chain.optimizer.k_r, 1e-3);
  EXPECT_TRUE(std::isinf(cfg.chain.radius));
  const auto& drl = std::get<DelayedRejectionLocal>(cfg.chain.proposal);
  EXPECT_DOUBLE_EQ(drl.sigma1, 0.8);
  EXPECT_DOUBLE_EQ(drl.sigma2, 0.2);
  EXPECT_EQ(cfg.method_label(), "tm+drl");
  EXPECT_EQ(parse("[problem]\nname = gaussian\n[run]\nsampler = am\n").method_label(), "am");
}

TEST(Config, ErrorsNameLineAndField) {
  const auto expect_error = [](const std::string& text, int line, const std::string& field) {
    try {
      parse(text);
      ADD_FAILURE() << "accepted: " << text;
    } catch (const ConfigError& e) {
      EXPECT_EQ(e.line(), line) << text;
      EXPECT_EQ(e.field(), field) << text;
    }
  };
  expect_error("[problem]\nname = banana\nnmae = x\n", 3, "problem.nmae");
  expect_error("[problem]\nname = banana\n[chian]\nsteps = 10\n", 4, "chian");
  expect_error("[problem]\nname = banana\n[chain]\nsteps = many\n", 4, "chain.steps");
  expect_error("[problem]\nname = banana\n[chain]\nsteps = 10.5\n", 4, "chain.steps");
  expect_error("[problem]\nname = quartic\n", 2, "problem.name");
  expect_error("[problem]\nname = banana\n[proposal]\ntype = hmc\n", 4, "proposal.type");
  expect_error("[problem]\nname = banana\nname = bod\n", 3, "problem.name");
  expect_error("[run]\nseed = 1\n", 0, "problem.name");
  expect_error("[problem]\nname = banana\n[run]\nreplicates = 0\n", 4, "run.replicates");
  expect_error("[problem]\nname = banana\n[run]\nseed = -3\n", 4, "run.seed");
  expect_error("name = banana\n", 1, "");
  expect_error("[problem\nname = banana\n", 1, "");
}

TEST(Config, SemanticValidation) {
  EXPECT_THROW(parse("[problem]\nname = banana\n[chain]\nsteps = 100\nburn_in = 100\n"), ConfigError);
  EXPECT_THROW(parse("[problem]\nname = banana\n[proposal]\ntype = drl\nsigma1 = 0.1\nsigma2 = 0.5\n"), ConfigError);
  EXPECT_THROW(parse("[problem]\nname = banana\n[proposal]\ntype = mix\nw_max = 1.0\n"), ConfigError);
  EXPECT_THROW(parse("[problem]\nname = banana\n[basis]\ndegree = 0\n"), ConfigError);
  EXPECT_THROW(parse("[problem]\nname = banana\n[map]\nlambda_min = 0\n"), ConfigError);
}

TEST(Samples, RoundTripAndErrors) {
  Eigen::MatrixXd m(3, 2);
  m << 0.1, -2.5, 1.0 / 3.0, 4e-300, 7.0, 8.0;
  std::stringstream io;
  write_samples(io, m, 42);
  EXPECT_EQ(read_samples(io), m);
  std::istringstream ragged("1 2\n3\n");
  EXPECT_THROW(read_samples(ragged), ParseError);
  std::istringstream junk("1 x\n");
  EXPECT_THROW(read_samples(junk), ParseError);
  std::istringstream empty("# dim=2 steps=0 seed=0\n");
  EXPECT_THROW(read_samples(empty), ParseError);
}

TEST(Run, ProducesArtifactsAndIsDeterministic) {
  TempDir tmp;
  const fs::path cfg = tmp.path() / "banana.ini";
  const fs::path out = tmp.path() / "out";
  write_text(cfg, banana_config(out, 3));
  std::ostringstream so, se;
  ASSERT_EQ(cmd_run({cfg, std::nullopt, std::nullopt, 2}, so, se), kExitOk) << se.str();
  for (const char* name : {"samples_r0.txt", "samples_r1.txt", "samples_r2.txt", "diagnostics.json", "summary.txt",
                           "adaptations_r0.txt"}) {
    EXPECT_TRUE(fs::exists(out / name)) << name;
  }
  EXPECT_TRUE(fs::is_directory(out / "maps"));
  const auto reports = parse_report_json(slurp(out / "diagnostics.json"));
  ASSERT_EQ(reports.size(), 3u);
  for (int r = 0; r < 3; ++r) EXPECT_EQ(reports[static_cast<std::size_t>(r)].seed, 17u + r);
  EXPECT_NE(slurp(out / "samples_r0.txt"), slurp(out / "samples_r1.txt"));
  EXPECT_NE(so.str().find("Rel ESS/eval"), std::string::npos);

  const fs::path again = tmp.path() / "again";
  ASSERT_EQ(cmd_run({cfg, again, std::nullopt, 1}, so, se), kExitOk) << se.str();
  for (int r = 0; r < 3; ++r) {
    EXPECT_EQ(slurp(out / samples_file_name(r)), slurp(again / samples_file_name(r)));
  }
}

TEST(Run, ConfigErrorsExitTwo) {
  TempDir tmp;
  const fs::path cfg = tmp.path() / "bad.ini";
  write_text(cfg, "[problem]\nname = banana\n[chain]\nstesp = 10\n");
  std::ostringstream so, se;
  EXPECT_EQ(cmd_run({cfg, std::nullopt, std::nullopt, 1}, so, se), kExitConfig);
  EXPECT_NE(se.str().find("line 4"), std::string::npos);
  EXPECT_NE(se.str().find("chain.stesp"), std::string::npos);
  EXPECT_EQ(cmd_run({tmp.path() / "missing.ini", std::nullopt, std::nullopt, 1}, so, se), kExitConfig);
  write_text(cfg, banana_config(tmp.path() / "o", 1));
  EXPECT_EQ(cmd_run({cfg, std::nullopt, std::nullopt, 0}, so, se), kExitConfig);
}

TEST(Fitmap, NearIdentityOnStandardNormal) {
  TempDir tmp;
  std::mt19937_64 gen(3);
  std::normal_distribution<double> z;
  Eigen::MatrixXd x(20000, 2);
  for (Eigen::Index k = 0; k < x.rows(); ++k) x.row(k) << z(gen), z(gen);
  {
    std::ofstream f(tmp.path() / "s.txt");
    write_samples(f, x, 0);
  }
  FitmapOptions opt;
  opt.samples = tmp.path() / "s.txt";
  opt.output = tmp.path() / "a.map";
  std::ostringstream so, se;
  ASSERT_EQ(cmd_fitmap(opt, so, se), kExitOk) << se.str();
  std::ifstream in(opt.output);
  const auto map = read_map(in);
  const auto id = identity_map(map.index_sets());
  for (int i = 0; i < 2; ++i) {
    const Eigen::VectorXd diff = map.component(i).coefficients() - id.component(i).coefficients();
    EXPECT_LT(diff.cwiseAbs().maxCoeff(), 0.03);
  }
  EXPECT_NE(so.str().find("coefficients 1:"), std::string::npos);

  opt.output = tmp.path() / "b.map";
  ASSERT_EQ(cmd_fitmap(opt, so, se), kExitOk);
  EXPECT_EQ(slurp(tmp.path() / "a.map"), slurp(tmp.path() / "b.map"));
}

TEST(Fitmap, InputErrorsExitTwo) {
  TempDir tmp;
  write_text(tmp.path() / "empty.txt", "");
  FitmapOptions opt;
  opt.samples = tmp.path() / "empty.txt";
  opt.output = tmp.path() / "m.map";
  std::ostringstream so, se;
  EXPECT_EQ(cmd_fitmap(opt, so, se), kExitConfig);
  opt.samples = tmp.path() / "nope.txt";
  EXPECT_EQ(cmd_fitmap(opt, so, se), kExitConfig);
  write_text(tmp.path() / "s.txt", "0 1\n1 0\n2 2\n");
  write_text(tmp.path() / "basis.ini", "[basis]\ndegree = two\n");
  opt.samples = tmp.path() / "s.txt";
  opt.config = tmp.path() / "basis.ini";
  EXPECT_EQ(cmd_fitmap(opt, so, se), kExitConfig);
}

TEST(Compare, SelfComparisonAndHandRatios) {
  TempDir tmp;
  const auto rep = [](const std::string& method, double ess, long evals, double secs) {
    EssReport r;
    r.method = method;
    r.min_ess = ess;
    r.evaluations = evals;
    r.seconds = secs;
    r.ess_per_eval = ess / static_cast<double>(evals);
    r.ess_per_second = ess / secs;
    r.tau = {2.0};
    r.tau_max = 2.0;
    return r;
  };
  fs::create_directories(tmp.path() / "a");
  fs::create_directories(tmp.path() / "b");
  write_text(tmp.path() / "a" / "diagnostics.json", report_json({rep("am", 100, 10000, 1.0)}));
  write_text(tmp.path() / "b" / "diagnostics.json", report_json({rep("tm+drg", 500, 20000, 4.0)}));

  std::ostringstream so, se;
  CompareOptions self{{tmp.path() / "a", tmp.path() / "a"}, "", std::nullopt};
  ASSERT_EQ(cmd_compare(self, so, se), kExitOk) << se.str();
  for (const auto& row : efficiency_table(parse_report_json(slurp(tmp.path() / "a" / "diagnostics.json")))) {
    EXPECT_DOUBLE_EQ(row.rel_ess_per_eval, 1.0);
  }
  EXPECT_NE(so.str().find("1.00"), std::string::npos);

  CompareOptions both{{tmp.path() / "a", tmp.path() / "b"}, "am", tmp.path() / "cmp"};
  std::ostringstream so2;
  ASSERT_EQ(cmd_compare(both, so2, se), kExitOk) << se.str();
  const auto rows = efficiency_table({rep("am", 100, 10000, 1.0), rep("tm+drg", 500, 20000, 4.0)}, "am");
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_NEAR(rows[1].rel_ess_per_eval, 2.5, 1e-12);
  EXPECT_NEAR(rows[1].rel_ess_per_second, 1.25, 1e-12);
  EXPECT_EQ(slurp(tmp.path() / "cmp" / "comparison.json"), table_json(rows) + "\n");
  EXPECT_TRUE(fs::exists(tmp.path() / "cmp" / "comparison.txt"));
}

TEST(Compare, InputErrors) {
  TempDir tmp;
  std::ostringstream so, se;
  EXPECT_EQ(cmd_compare({{tmp.path()}, "", std::nullopt}, so, se), kExitConfig);
  EXPECT_EQ(cmd_compare({{tmp.path() / "x", tmp.path() / "y"}, "", std::nullopt}, so, se), kExitConfig);
  fs::create_directories(tmp.path() / "bad");
  write_text(tmp.path() / "bad" / "diagnostics.json", "{oops");
  EXPECT_EQ(cmd_compare({{tmp.path() / "bad", tmp.path() / "bad"}, "", std::nullopt}, so, se), kExitConfig);
}

TEST(Config, ShippedConfigsParse) {
  int seen = 0;
  for (const auto& entry : fs::directory_iterator(TMCMC_CONFIG_DIR)) {
    if (entry.path().extension() != ".ini") continue;
    EXPECT_NO_THROW(load_run_config(entry.path())) << entry.path();
    ++seen;
  }
  EXPECT_GE(seen, 5);
}
