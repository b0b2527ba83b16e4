#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "csiloc/preprocess.hpp"
#include "csiloc/training.hpp"

namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome run(std::vector<std::string> args) {
  args.insert(args.begin(), "csiloc");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = csiloc::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("csiloc_cli_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) +
                                        ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  fs::path dir_;
};

}  // namespace

TEST_F(CliTest, UsageErrors) {
  EXPECT_EQ(run({}).code, 1);
  EXPECT_EQ(run({"bogus"}).code, 1);
  EXPECT_EQ(run({"simulate"}).code, 1);  // --out is required
  EXPECT_EQ(run({"simulate", "--out", path("x"), "--grids", "64"}).code, 1);
  EXPECT_EQ(run({"simulate", "--out", path("x"), "--packets", "5", "--imbalance"}).code, 1);
  EXPECT_EQ(run({"train", "--task", "nonsense", "--data", path("x")}).code, 1);
  const Outcome help = run({"--help"});
  EXPECT_EQ(help.code, 0);
  EXPECT_NE(help.out.find("simulate"), std::string::npos);
}

TEST_F(CliTest, RuntimeErrorsExitTwo) {
  {
    std::ofstream f(path("junk.csids"), std::ios::binary);
    f << "not a dataset";
  }
  const Outcome r = run({"split", "--in", path("junk.csids")});
  EXPECT_EQ(r.code, 2);
  EXPECT_EQ(r.err.rfind("error: ", 0), 0u);
  EXPECT_EQ(run({"preprocess", "--in", dir_.string(), "--out", path("o.csids")}).code, 2);
}

TEST_F(CliTest, EndToEnd) {
  const std::string logs = path("logs");
  Outcome r = run({"simulate", "--seed", "3", "--grids", "4", "--packets", "12", "--workers", "2", "--out", logs});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(fs::exists(fs::path(logs) / "manifest.csv"));
  EXPECT_TRUE(fs::exists(fs::path(logs) / "grid_4.csilog"));

  r = run({"decode", "--in", (fs::path(logs) / "grid_2.csilog").string(), "--filter"});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("decoded 12, kept 12"), std::string::npos) << r.out;

  const std::string data = path("all.csids");
  r = run({"preprocess", "--in", logs, "--out", data});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(csiloc::prep::read_dataset(data).size(), 48u);

  r = run({"split", "--in", data, "--out", path("split"), "--seed", "1"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(csiloc::prep::read_dataset(path("split/all.train.csids")).size(), 36u);
  EXPECT_EQ(csiloc::prep::read_dataset(path("split/all.validation.csids")).size(), 4u);
  EXPECT_EQ(csiloc::prep::read_dataset(path("split/all.test.csids")).size(), 8u);

  r = run({"train", "--task", "classification", "--data", data, "--epochs", "2", "--batch", "8", "--out",
           path("net.bin"), "--metrics", path("m.csv")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto log = csiloc::train::read_metrics_csv(path("m.csv"));
  EXPECT_EQ(log.epochs.size(), 2u);
  EXPECT_TRUE(log.test.has_value());

  r = run({"evaluate", "--model", path("net.bin"), "--data", data});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("samples 48"), std::string::npos);
  EXPECT_NE(r.out.find("accuracy"), std::string::npos);

  // A dataset is not a checkpoint.
  r = run({"evaluate", "--model", data, "--data", data});
  EXPECT_EQ(r.code, 2);
}

TEST_F(CliTest, DecodeReportsTruncation) {
  const std::string logs = path("logs");
  ASSERT_EQ(run({"simulate", "--grids", "1", "--packets", "3", "--out", logs}).code, 0);
  const fs::path log = fs::path(logs) / "grid_1.csilog";
  fs::resize_file(log, fs::file_size(log) - 7);
  const Outcome r = run({"decode", "--in", log.string()});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.out.find("decoded 2"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("warning"), std::string::npos);
}

TEST_F(CliTest, GradcheckSmall) {
  const Outcome r = run({"gradcheck", "--probes", "3", "--samples", "1"});
  EXPECT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("max relative error"), std::string::npos);
}
