#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "gated_spectra/experiments/cli.hpp"
#include "gated_spectra/experiments/commands.hpp"
#include "gated_spectra/experiments/config.hpp"
#include "gated_spectra/experiments/table.hpp"
#include "gated_spectra/lyapunov/theory.hpp"
#include "gated_spectra/util/errors.hpp"

using namespace gspec;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("gated_spectra_test_" + name);
  fs::remove_all(p);
  return p;
}

int cli(std::vector<std::string> args) {
  args.insert(args.begin(), "gated-spectra");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  return run_cli(static_cast<int>(argv.size()), argv.data());
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

ExperimentConfig quick(std::string_view sub, std::string_view mode = "") {
  ExperimentConfig c = default_config(sub, mode);
  c.trials = 2;
  c.d_trials = 200;
  return c;
}

}  // namespace

TEST(Config, JsonRoundTripIsStable) {
  for (auto sub : kSubcommands) {
    for (const auto& mode : subcommand_modes(sub)) {
      for (bool paper : {false, true}) {
        const ExperimentConfig c = default_config(sub, mode, paper);
        EXPECT_NO_THROW(c.validate()) << sub << " " << mode;
        const auto j = to_json(c);
        const ExperimentConfig back = overlay_json(default_config(sub, mode, paper), j);
        EXPECT_EQ(to_json(back), j);
        EXPECT_EQ(config_hash(back), config_hash(c));
      }
    }
  }
}

TEST(Config, SigmaAutoResolvesToInverseSqrtN) {
  ExperimentConfig c = default_config("spectrum");
  EXPECT_DOUBLE_EQ(c.resolved_sigma(), 1.0 / std::sqrt(128.0));
  c = overlay_json(c, {{"n", 64}, {"sigma", "auto"}});
  EXPECT_DOUBLE_EQ(to_json(c)["sigma"].get<double>(), 0.125);
}

TEST(Config, RejectsBadInput) {
  const ExperimentConfig c = default_config("spectrum");
  EXPECT_THROW(overlay_json(c, {{"bogus", 1}}), ConfigError);
  EXPECT_THROW(overlay_json(c, {{"n", -3}}), ConfigError);
  EXPECT_THROW(overlay_json(c, {{"p", "half"}}), ConfigError);
  EXPECT_THROW(overlay_json(c, {{"train", {{"nope", 1}}}}), ConfigError);
  EXPECT_THROW(default_config("nonsense"), ConfigError);
  EXPECT_THROW(default_config("alignment", "sideways"), ConfigError);
  ExperimentConfig bad = c;
  bad.p = {1.5};
  EXPECT_THROW(bad.validate(), ConfigError);
  bad = c;
  bad.depths = {10, 20};
  EXPECT_THROW(bad.validate(), ConfigError);
  bad = c;
  bad.k_max = 200;
  EXPECT_THROW(bad.validate(), ConfigError);
}

TEST(Table, CsvFormatting) {
  ResultTable t("x", {{"a"}, {"b", true}});
  t.add_row({1.0, 0.1});
  t.add_row({-2.5e-20, std::nan("")});
  t.add_row({-0.0, -std::numeric_limits<double>::infinity()});
  EXPECT_EQ(t.to_csv(), "a,b\n1,0.1\n-2.5e-20,nan\n0,-inf\n");
  EXPECT_THROW(t.add_row({std::nan(""), 1.0}), NumericalFailure);
  EXPECT_THROW(t.add_row({1.0}), ShapeMismatch);
  EXPECT_EQ(t.column_values("a").size(), 3u);
  EXPECT_THROW(t.column_index("c"), DomainError);
  EXPECT_EQ(format_number(0.1 + 0.2), "0.30000000000000004");
}

TEST(Commands, ConvergenceTableShape) {
  ExperimentConfig c = quick("lyapunov-convergence");
  c.n = 16;
  c.depths = {3, 6};
  const auto out = run_command(c);
  const auto& t = out.tables.front();
  EXPECT_EQ(t.row_count(), 4u);
  EXPECT_EQ(t.columns()[0].name, "p");
  EXPECT_EQ(t.columns()[3].name, "empirical_mean");
  for (std::size_t r = 0; r < t.row_count(); ++r) EXPECT_TRUE(std::isfinite(t.at(r, "empirical_stderr")));
}

TEST(Commands, SpectrumSingleRow) {
  ExperimentConfig c = quick("spectrum");
  c.n = 12;
  c.k_max = 1;
  const auto out = run_command(c);
  EXPECT_EQ(out.tables.front().row_count(), 1u);
}

TEST(Commands, DepthScalingTwoLayerFitIsExact) {
  ExperimentConfig c = quick("depth-scaling");
  c.n = 10;
  c.depths = {2};
  c.p = {1.0};
  c.k_max = 4;
  const auto out = run_command(c);
  ASSERT_EQ(out.tables.size(), 2u);
  EXPECT_EQ(out.tables[0].row_count(), 8u);
  for (std::size_t r = 0; r < out.tables[1].row_count(); ++r)
    EXPECT_NEAR(out.tables[1].at(r, "residual"), 0.0, 1e-12);
}

TEST(Commands, TrainZeroStepsIsSnapshot) {
  ExperimentConfig c = quick("train");
  c.n = 12;
  c.depths = {3};
  c.k_max = 3;
  c.train.task_rank = 2;
  c.train.samples = 30;
  c.train.steps = 0;
  const auto out = run_command(c);
  EXPECT_EQ(out.tables.front().row_count(), 1u);
  EXPECT_EQ(out.tables.front().at(0, "t"), 0.0);
}

TEST(Commands, BalancedTrainPredictionColumnsAgree) {
  ExperimentConfig c = default_config("train", "balanced");
  c.train.steps = 20;
  const auto out = run_command(c);
  const auto& t = out.tables.front();
  for (std::size_t k = 1; k <= 5; ++k) {
    const std::string ks = std::to_string(k);
    const double pred = t.at(0, "sdot_balanced_" + ks);
    EXPECT_NEAR(t.at(0, "sdot_observed_" + ks), pred, 1e-3 * std::abs(pred)) << k;
  }
}

TEST(Commands, DCoefficientsRows) {
  ExperimentConfig c = quick("d-coefficients");
  c.n = 16;
  c.k_max = 3;
  c.trials = 4000;
  const auto out = run_command(c);
  const auto& t = out.tables.front();
  EXPECT_EQ(t.at(0, "estimate"), 0.0);
  EXPECT_NEAR(t.at(1, "closed_form"), d1_closed_form(16), 1e-15);
  EXPECT_LT(std::abs(t.at(1, "closed_form_z")), 4.0);
  EXPECT_TRUE(std::isnan(t.at(2, "closed_form")));
}

TEST(Commands, SyntheticSweepRows) {
  ExperimentConfig c = default_config("alignment", "synthetic-sweep");
  c.trials = 1;
  c.taus = {4};
  const auto out = run_command(c);
  const auto& t = out.tables.front();
  EXPECT_EQ(t.row_count(), 6u);  // off-diagonal entries of a 3 x 3 block
  for (std::size_t r = 0; r < t.row_count(); ++r) EXPECT_NEAR(t.at(r, "ratio"), 1.0, 0.1);
}

TEST(Commands, DeterministicTables) {
  ExperimentConfig c = quick("alignment");
  c.n = 12;
  c.depths = {2, 4};
  const auto a = run_command(c);
  const auto b = run_command(c);
  EXPECT_EQ(a.tables.front().to_csv(), b.tables.front().to_csv());
  c.seed += 1;
  EXPECT_NE(run_command(c).tables.front().to_csv(), a.tables.front().to_csv());
}

TEST(Cli, WritesOutputsAndReconstructsFromConfig) {
  const fs::path dir = scratch_dir("cli_ok");
  ASSERT_EQ(cli({"d-coefficients", "--n", "8", "--k-max", "3", "--trials", "200", "--out", dir.string()}),
            kExitOk);
  ASSERT_TRUE(fs::exists(dir / "d-coefficients.csv"));
  ASSERT_TRUE(fs::exists(dir / "config.json"));
  const auto meta = nlohmann::json::parse(slurp(dir / "meta.json"));
  EXPECT_EQ(meta["status"], "ok");
  EXPECT_EQ(meta["seed"], 2026u);
  EXPECT_EQ(meta["schema_version"], kSchemaVersion);

  const fs::path again = scratch_dir("cli_again");
  ASSERT_EQ(cli({"d-coefficients", "--config", (dir / "config.json").string(), "--out", again.string()}),
            kExitOk);
  EXPECT_EQ(slurp(dir / "d-coefficients.csv"), slurp(again / "d-coefficients.csv"));
  EXPECT_EQ(slurp(dir / "config.json"), slurp(again / "config.json"));
}

TEST(Cli, ExitCodes) {
  const fs::path dir = scratch_dir("cli_codes");
  EXPECT_EQ(cli({"spectrum", "--k-max", "500", "--out", dir.string()}), kExitConfig);
  EXPECT_EQ(cli({"spectrum", "--p", "2", "--out", dir.string()}), kExitConfig);
  EXPECT_EQ(cli({"spectrum", "--sigma", "abc", "--out", dir.string()}), kExitConfig);
  EXPECT_EQ(cli({"no-such-command"}), kExitConfig);
  EXPECT_EQ(cli({"spectrum", "--config", "/nonexistent/file.json"}), kExitConfig);
  // explicit step size far past the stability limit is refused
  EXPECT_EQ(cli({"train", "--eta", "50", "--steps", "5", "--out", dir.string()}), kExitConfig);
}

TEST(Cli, DivergenceWritesPartialTrace) {
  // small initial map: eta = 0.5 passes the eta s_1^2 < 1 check but the run blows up
  const fs::path dir = scratch_dir("cli_diverge");
  const int rc = cli({"train", "--n", "16", "--depth", "4", "--k-max", "4", "--eta", "0.5", "--steps", "300",
                      "--out", dir.string()});
  EXPECT_EQ(rc, kExitDivergence);
  const auto meta = nlohmann::json::parse(slurp(dir / "meta.json"));
  EXPECT_EQ(meta["status"], "diverged");
  EXPECT_TRUE(fs::exists(dir / "train.csv"));
}
