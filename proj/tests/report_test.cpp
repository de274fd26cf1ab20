#include "mpcg/report.hpp"

#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

using namespace mpcg;

namespace {

ExperimentConfig cfg_of(const std::string& text) { return ExperimentConfig::parse(text); }

}  // namespace

TEST(ExperimentConfig, DefaultsAndOverrides) {
  auto c = cfg_of("# comment\npipeline = emst\nn = 50\nrho = 1.0\nsingle_label = true\n");
  EXPECT_EQ(c.pipeline, "emst");
  EXPECT_EQ(c.gen.n, 50u);
  EXPECT_EQ(c.rho, 1.0);
  EXPECT_TRUE(c.single_label);
  EXPECT_EQ(c.s, 1024u);
  EXPECT_EQ(c.name, "experiment");
  const auto j = c.to_json();
  EXPECT_EQ(j["rho"], 1.0);
  EXPECT_EQ(j["oracle_cap"], 5000);
  EXPECT_EQ(j["ceiling"], "relaxed");
}

TEST(ExperimentConfig, Rejects) {
  EXPECT_THROW(cfg_of("pipline = emst\n"), ConfigError);
  EXPECT_THROW(cfg_of("pipeline = kmeans\n"), ConfigError);
  EXPECT_THROW(cfg_of("n = lots\n"), ConfigError);
  EXPECT_THROW(cfg_of("name = a/b\n"), ConfigError);
  EXPECT_THROW(cfg_of("just words\n"), ConfigError);
}

TEST(RunExperiment, EmstOnLatticePathIsExact) {
  auto c = cfg_of("pipeline = emst\nkind = lattice-path\nd = 2\nn = 40\ns = 16\n");
  const auto out = run_experiment(c);
  EXPECT_TRUE(out.all_pass) << out.report.dump(2);
  EXPECT_EQ(out.report["summary"]["ratio_overall"].get<double>(), 1.0);
  EXPECT_EQ(out.report["summary"]["edges"], 39);
}

TEST(RunExperiment, DbscanTwoClustersMinPtsOne) {
  auto c = cfg_of("pipeline = dbscan\nkind = lattice-two-clusters\nd = 2\nn = 60\ngap = 3\neps = 1\nmin_pts = 1\ns = 64\n");
  const auto out = run_experiment(c);
  EXPECT_TRUE(out.all_pass) << out.report.dump(2);
  EXPECT_EQ(out.report["summary"]["n_clusters"], 2);
  EXPECT_EQ(out.report["summary"]["noise"], 0);
  EXPECT_EQ(out.report["verdicts"]["core_rounds"], "PASS");
}

TEST(RunExperiment, GridPipelinesAgainstOracles) {
  for (const char* p : {"grid-cc", "grid-msf"}) {
    auto c = cfg_of(std::string("pipeline = ") + p +
                    "\nkind = uniform\nd = 2\nn = 600\ndelta = 60\nc = 2\nrule = hashed_weight\ns = 256\n");
    const auto out = run_experiment(c);
    EXPECT_TRUE(out.all_pass) << p << "\n" << out.report.dump(2);
    EXPECT_EQ(out.report["verdicts"]["partition_equals_exact"], "PASS");
  }
}

TEST(RunExperiment, SeparatorUniform3d) {
  auto c = cfg_of("pipeline = separator\nkind = uniform\nd = 3\nn = 8000\ndelta = 40\nc = 1\ns = 1000\n");
  const auto out = run_experiment(c);
  EXPECT_TRUE(out.all_pass) << out.report.dump(2);
  const auto& sm = out.report["summary"];
  EXPECT_LE(sm["separator_size"].get<double>(), sm["separator_bound"].get<double>());
  EXPECT_LE(sm["max_part_size"].get<double>(), sm["part_size_bound"].get<double>());
  EXPECT_EQ(sm["cross_part_edges"], 0);
}

TEST(RunExperiment, OracleCapSkipsRatherThanFails) {
  auto c = cfg_of("pipeline = grid-cc\nkind = uniform\nd = 2\nn = 300\ndelta = 40\ns = 128\noracle_cap = 100\n");
  const auto out = run_experiment(c);
  EXPECT_TRUE(out.all_pass);
  EXPECT_EQ(out.report["verdicts"]["partition_equals_exact"].get<std::string>().rfind("SKIP", 0), 0u);
}

TEST(RunExperiment, StageErrorIsReported) {
  // c_growth = 2 cannot make progress at rho = 0.5
  auto c = cfg_of("pipeline = emst\nkind = uniform\nd = 2\nn = 30\ndelta = 50\nc_growth = 2\ns = 16\n");
  const auto out = run_experiment(c);
  EXPECT_FALSE(out.all_pass);
  EXPECT_EQ(out.report["verdicts"]["completed"], "FAIL");
  EXPECT_EQ(out.report["error"]["stage"], "emst");
  EXPECT_EQ(out.report["error"]["type"], "ConfigError");
  EXPECT_EQ(out.report["error"]["round"], 1);
}

TEST(RunExperiment, ReportsAreByteIdentical) {
  for (const char* p : {"grid-cc", "grid-msf", "separator", "emst", "dbscan"}) {
    auto c = cfg_of(std::string("pipeline = ") + p +
                    "\nkind = clustered\nd = 2\nn = 400\ndelta = 400\nspread = 8\neps = 6\nc = 3\nseed = 7\n"
                    "s = 128\nemit_output = true\n");
    const auto a = run_experiment(c), b = run_experiment(c);
    EXPECT_EQ(a.report.dump(2), b.report.dump(2)) << p;
    EXPECT_EQ(a.rounds_csv, b.rounds_csv) << p;
    EXPECT_TRUE(a.all_pass) << p << "\n" << a.report["verdicts"].dump();
  }
}

TEST(RunExperiment, WritesArtifacts) {
  auto c = cfg_of("name = artifacts\npipeline = grid-cc\nkind = lattice-path\nn = 20\ns = 16\nseed = 3\n");
  const auto out = run_experiment(c);
  const auto root = std::filesystem::temp_directory_path() / "mpcg_report_test";
  std::filesystem::remove_all(root);
  const auto dir = write_outcome(out, c, root, 0.5);
  EXPECT_EQ(dir, root / "artifacts" / "3");
  std::ifstream rep(dir / "report.json");
  std::stringstream ss;
  ss << rep.rdbuf();
  EXPECT_EQ(ss.str(), out.report.dump(2) + "\n");
  std::ifstream csv(dir / "rounds.csv");
  std::string header;
  std::getline(csv, header);
  EXPECT_EQ(header, "round,phase,max_sent,max_received,max_store,violation");
  EXPECT_TRUE(std::filesystem::exists(dir / "timing.json"));
  std::filesystem::remove_all(root);
}
