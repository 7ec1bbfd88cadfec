#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "cli.hpp"
#include "fixtures.hpp"
#include "rjbma/archive.hpp"
#include "rjbma/csv.hpp"
#include "rjbma/plot_data.hpp"
#include "rjbma/report.hpp"

namespace rjbma {
namespace {

namespace fs = std::filesystem;

struct CliRun {
  int code;
  std::string out, err;
};

CliRun cli(std::vector<std::string> args) {
  args.insert(args.begin(), "rjbma");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

class Cli : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = new testing::TempDir("cli");
    save_fit(testing::toy_fit(), dir_->path() / "fit");
  }
  static void TearDownTestSuite() {
    delete dir_;
    dir_ = nullptr;
  }
  static fs::path path(const std::string& name) { return dir_->path() / name; }
  static std::string fit_dir() { return path("fit").string(); }

  static testing::TempDir* dir_;
};

testing::TempDir* Cli::dir_ = nullptr;

TEST_F(Cli, UsageErrorsExitOne) {
  EXPECT_EQ(cli({}).code, 1);
  EXPECT_EQ(cli({"frobnicate"}).code, 1);
  EXPECT_EQ(cli({"simulate"}).code, 1);  // --out is required
  EXPECT_EQ(cli({"simulate", "--out", "x.csv", "--n", "abc"}).code, 1);
  const CliRun r = cli({"summary"});
  EXPECT_EQ(r.code, 1);
  EXPECT_TRUE(r.out.empty());
  EXPECT_FALSE(r.err.empty());
}

TEST_F(Cli, HelpExitsZero) {
  const CliRun r = cli({"--help"});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.err.find("plotdata"), std::string::npos);
}

TEST_F(Cli, DataErrorsExitTwo) {
  const CliRun r = cli({"fit", "--data", path("absent.csv").string(), "--out-dir", path("f2").string()});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("absent.csv"), std::string::npos);
  EXPECT_EQ(cli({"summary", path("absent").string()}).code, 2);
  EXPECT_EQ(cli({"simulate", "--n", "0", "--out", path("s.csv").string()}).code, 2);
  EXPECT_EQ(cli({"plotdata", fit_dir(), "--sample-type", "estimand", "--plot-type", "cred", "--out",
                 path("p.csv").string()})
                .code,
            2);
  EXPECT_EQ(cli({"subspace", fit_dir(), "--alpha", "1.5"}).code, 2);
}

TEST_F(Cli, SimulateMatchesLibrary) {
  const CliRun r = cli({"simulate", "--n", "50", "--seed", "8", "--out", path("sim.csv").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  SimConfig cfg;
  cfg.n = 50;
  cfg.seed = 8;
  EXPECT_EQ(slurp(path("sim.csv")), format_csv(simulate(cfg)));
}

TEST_F(Cli, FitWritesArchive) {
  ASSERT_EQ(cli({"simulate", "--n", "120", "--seed", "3", "--out", path("d.csv").string()}).code, 0);
  std::ofstream(path("cfg.txt")) << "iter = 200\nchains = 2\n";
  const CliRun r = cli({"fit", "--data", path("d.csv").string(), "--outcome", "Y", "--factor", "trt",
                     "--splinevars", "X_1", "--binaryvars", "Z_1,Z_2", "--inter", "X_1", "Z_1",
                     "--config", path("cfg.txt").string(), "--seed", "4", "--out-dir",
                     path("fitted").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const FitResult fit = load_fit(path("fitted"));
  EXPECT_EQ(fit.mcmc.iter, 200);
  EXPECT_EQ(fit.mcmc.warmup, 100);
  EXPECT_EQ(fit.chains.size(), 2u);
  EXPECT_EQ(fit.candidates.interaction_vars, (std::vector<std::string>{"X_1", "Z_1"}));
  EXPECT_EQ(fit.master_seed, 4u);
}

TEST_F(Cli, SummaryIsTheLibraryReport) {
  const CliRun r = cli({"summary", fit_dir()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out, summary_text(load_fit(fit_dir()), (fs::path(fit_dir()) / "data.csv").string()));
  EXPECT_NE(r.out.find("Y ~ fbs(X_1) + Z_1 + Z_2 + Z_3 + Z_4 + Z_5 + trt + \n    fbs(X_1):trt + Z_1:trt"),
            std::string::npos);
  EXPECT_NE(r.out.find("Note: fbs() indicates a free-knot B-spline."), std::string::npos);
  EXPECT_NE(r.out.find("PIP = posterior inclusion probability"), std::string::npos);
}

TEST_F(Cli, SubspaceWritesFlags) {
  const CliRun r = cli({"subspace", fit_dir(), "--alpha", "0.025", "--out", path("flags.csv").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const SubspaceReport report = effective_subspace(testing::toy_fit(), 0.025);
  EXPECT_EQ(r.out, subspace_text(report));
  EXPECT_EQ(slurp(path("flags.csv")), subspace_flags_csv(report));
}

TEST_F(Cli, DiagnoseAndPlotData) {
  const CliRun d = cli({"diagnose", fit_dir()});
  ASSERT_EQ(d.code, 0) << d.err;
  EXPECT_EQ(d.out, diagnose_text(load_fit(fit_dir())));

  const CliRun p = cli({"plotdata", fit_dir(), "--sample-type", "fitted", "--plot-type", "cred",
                     "--effect-type", "exposure_effect", "--out", path("cred.csv").string()});
  ASSERT_EQ(p.code, 0) << p.err;
  EXPECT_NE(p.err.find("will be set to 0: Z_2, Z_3, Z_4, Z_5"), std::string::npos);
  PlotDataRequest req;
  EXPECT_EQ(slurp(path("cred.csv")), format_plot_csv(plot_data(testing::toy_fit(), req)));

  const CliRun f = cli({"plotdata", fit_dir(), "--plot-type", "hist", "--sample-type", "estimand",
                     "--variables", "Z_1", "--fix", "Z_2=bad", "--out", path("h.csv").string()});
  EXPECT_EQ(f.code, 2);
}

}  // namespace
}  // namespace rjbma
