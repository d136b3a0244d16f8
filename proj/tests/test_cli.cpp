// Drives the built `metacenter` binary end to end.

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>
#include <json.hpp>

#include "metacenter/checkpoint.hpp"
#include "metacenter/dataset.hpp"

namespace metacenter {
namespace {

namespace fs = std::filesystem;

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() / (std::string("metacenter_cli_") + info->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  // Exit status of `metacenter <args>`, output discarded.
  int run(const std::string& args) const {
    const std::string cmd = std::string("\"") + METACENTER_CLI + "\" " + args + " > \"" +
                            (dir_ / "stdout.txt").string() + "\" 2> \"" +
                            (dir_ / "stderr.txt").string() + "\"";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }

  std::string path(const std::string& name) const { return "\"" + (dir_ / name).string() + "\""; }

  std::string read(const std::string& name) const {
    std::ifstream in(dir_ / name, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
  }

  // Small dataset: 3 trials x 20 s at 10 Hz.
  int simulate(const std::string& name, int trials = 3) const {
    return run("simulate --box 9.5x2.4x1.2 --mass 5000 --duration 20 --seed 5 --trials " +
               std::to_string(trials) + " -o " + path(name));
  }

  fs::path dir_;
};

TEST_F(CliTest, SimulateWritesDatasetAndManifest) {
  ASSERT_EQ(simulate("raw.csv"), 0) << read("stderr.txt");
  const RawDataset d = read_dataset_csv(dir_ / "raw.csv");
  EXPECT_EQ(d.size(), 3u * 200u);
  EXPECT_EQ(d.trial_ids(), (std::vector<int>{0, 1, 2}));
  const auto manifest = nlohmann::json::parse(read("raw.csv.manifest.json"));
  EXPECT_NE(manifest.at("command").get<std::string>().find(" simulate "), std::string::npos);
  EXPECT_EQ(manifest.at("outputs").size(), 1u);
  EXPECT_EQ(manifest.at("outputs").at(0).at("sha256").get<std::string>().size(), 64u);
}

TEST_F(CliTest, SameFlagsSameBytes) {
  ASSERT_EQ(simulate("a.csv"), 0);
  ASSERT_EQ(simulate("b.csv"), 0);
  EXPECT_EQ(read("a.csv"), read("b.csv"));
  const auto ma = nlohmann::json::parse(read("a.csv.manifest.json"));
  const auto mb = nlohmann::json::parse(read("b.csv.manifest.json"));
  EXPECT_EQ(ma.at("outputs").at(0).at("sha256"), mb.at("outputs").at(0).at("sha256"));
}

TEST_F(CliTest, ConfigurationErrorsExitTwo) {
  EXPECT_EQ(run("simulate --box 9.5x2.4x1.2 -o " + path("x.csv")), 2);
  EXPECT_EQ(run("simulate --mass 5000 -o " + path("x.csv")), 2);
  EXPECT_EQ(run("simulate --box 1x1 --mass 5 -o " + path("x.csv")), 2);
  EXPECT_EQ(run("simulate --box 1x1x1 --mass 1e7 -o " + path("x.csv")), 2);
  EXPECT_EQ(run("train -i " + path("missing.csv")), 2);
  EXPECT_EQ(run("frobnicate"), 2);
  {
    std::ofstream(dir_ / "hull.json") << R"({"vertices": [[0,0,0]], "faces": [], "mass_kg": 1})";
  }
  EXPECT_EQ(run("simulate --hull " + path("hull.json") + " -o " + path("x.csv")), 2);
  ASSERT_EQ(simulate("raw.csv", 1), 0);
  EXPECT_EQ(run("train -i " + path("raw.csv") + " --iterations 5"), 2);
  EXPECT_NE(read("stderr.txt").find("trial"), std::string::npos);
}

TEST_F(CliTest, PreprocessTrainEvalPipeline) {
  ASSERT_EQ(simulate("raw.csv"), 0);
  ASSERT_EQ(run("preprocess -i " + path("raw.csv") + " -o " + path("clean.csv")), 0)
      << read("stderr.txt");
  const RawDataset clean = read_dataset_csv(dir_ / "clean.csv");
  EXPECT_TRUE(clean.has_flags);
  EXPECT_EQ(clean.size(), 600u);

  ASSERT_EQ(run("train -i " + path("clean.csv") + " --arch ts-grnn --iterations 40 --svg -o " +
                path("ts.json")),
            0)
      << read("stderr.txt");
  const Checkpoint ckpt = load_checkpoint(dir_ / "ts.json");
  EXPECT_EQ(ckpt.model.kind, NetworkKind::ts_grnn);
  EXPECT_EQ(ckpt.config.iterations, 40);
  EXPECT_TRUE(fs::exists(dir_ / "ts.curve.csv"));
  EXPECT_TRUE(fs::exists(dir_ / "ts.curve.svg"));

  ASSERT_EQ(run("eval --ckpt " + path("ts.json") + " -i " + path("clean.csv") + " -o " +
                path("profile.csv")),
            0)
      << read("stderr.txt");
  std::istringstream profile(read("profile.csv"));
  std::string line;
  std::getline(profile, line);
  EXPECT_EQ(line, "step,trials,mse_cm2,rmse_cm");
  int rows = 0;
  while (std::getline(profile, line)) ++rows;
  EXPECT_EQ(rows, 200);
}

TEST_F(CliTest, ConfigFileSuppliesOptions) {
  {
    std::ofstream(dir_ / "config.json")
        << R"({"simulate": {"box": "9.5x2.4x1.2", "mass": 5000, "trials": 2, "duration": 5}})";
  }
  ASSERT_EQ(run("--config " + path("config.json") + " simulate -o " + path("raw.csv")), 0)
      << read("stderr.txt");
  EXPECT_EQ(read_dataset_csv(dir_ / "raw.csv").size(), 100u);
}

TEST_F(CliTest, CompareWritesReportAndIsRepeatable) {
  ASSERT_EQ(simulate("raw.csv"), 0);
  const std::string common = "compare -i " + path("raw.csv") + " --iterations 30 --eval-every 10";
  ASSERT_EQ(run(common + " -o " + path("a")), 0) << read("stderr.txt");
  ASSERT_EQ(run(common + " --jobs 4 -o " + path("b")), 0) << read("stderr.txt");
  for (const char* f : {"report.json", "report.txt", "manifest.json", "fc.json", "rbf.curve.csv",
                        "ts-grnn.curve.csv"}) {
    EXPECT_TRUE(fs::exists(dir_ / "a" / f)) << f;
  }
  EXPECT_EQ(read("a/report.json"), read("b/report.json"));
  EXPECT_EQ(read("a/grnn.curve.csv"), read("b/grnn.curve.csv"));
  const auto report = nlohmann::json::parse(read("a/report.json"));
  EXPECT_EQ(report.at("results").size(), 4u);
}

TEST_F(CliTest, GradientCheckPasses) {
  EXPECT_EQ(run("gradcheck --all"), 0) << read("stderr.txt");
  EXPECT_NE(read("stdout.txt").find("ts-grnn"), std::string::npos);
  EXPECT_EQ(run("gradcheck --arch fc --tolerance 1e-30"), 1);
}

}  // namespace
}  // namespace metacenter
