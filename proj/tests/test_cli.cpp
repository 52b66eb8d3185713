// tests/test_cli.cpp - exit codes and outputs of the evb binary
#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace fs = std::filesystem;

namespace
{

const fs::path kCorpus = fs::path(EVB_TEST_DIR) / ".." / "corpus";

struct Outcome
{
  int code = -1;
  std::string out;
};

class Cli : public testing::Test
{
protected:
  void SetUp() override
  {
    dir_ = fs::temp_directory_path() / ("evb-cli-" + std::to_string(::getpid()) + "-" +
                                        testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  Outcome run(const std::string & args)
  {
    const fs::path out = dir_ / "stdout.txt";
    const std::string cmd =
      "cd '" + dir_.string() + "' && '" + std::string(EVB_BINARY) + "' " + args + " > '" + out.string() + "' 2>&1";
    const int raw = std::system(cmd.c_str());
    Outcome r;
    r.code = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
    std::ifstream in(out);
    std::stringstream ss;
    ss << in.rdbuf();
    r.out = ss.str();
    return r;
  }

  fs::path write(const std::string & name, const std::string & text)
  {
    const fs::path p = dir_ / name;
    std::ofstream(p) << text;
    return p;
  }

  fs::path dir_;
};

std::string q(const fs::path & p) { return "'" + p.string() + "'"; }

TEST_F(Cli, CheckCorpus)
{
  auto r = run("check --mode closed");
  EXPECT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("failed: 0"), std::string::npos) << r.out;
  r = run("check --mode driven " + q(kCorpus));
  EXPECT_EQ(r.code, 0) << r.out;
}

TEST_F(Cli, CheckMutantWritesTraces)
{
  const fs::path mutant = kCorpus / "mutants" / "mcp0_start_without_flow.ebs";
  const auto r = run("check --machine MCP0StartDry --mode closed --report report.jsonl " + q(kCorpus / "models") + " " +
                     q(mutant));
  EXPECT_EQ(r.code, 1) << r.out;
  ASSERT_TRUE(fs::exists(dir_ / "evb-traces"));
  EXPECT_FALSE(fs::is_empty(dir_ / "evb-traces"));
  std::ifstream report(dir_ / "report.jsonl");
  std::string line;
  bool failed_po = false;
  while (std::getline(report, line)) {
    const auto j = nlohmann::json::parse(line);
    if (j.value("record", "") == "obligation" && j.value("status", "") == "failed") failed_po = true;
  }
  EXPECT_TRUE(failed_po);
}

TEST_F(Cli, Refine)
{
  EXPECT_EQ(run("refine MCP0 MCP1").code, 0);
  EXPECT_EQ(run("refine MCP0 MTM0").code, 2);
  const auto r = run("refine MCP0 MCP1StartDry " + q(kCorpus / "models") + " " +
                     q(kCorpus / "mutants" / "mcp1_start_dry.ebs"));
  EXPECT_EQ(r.code, 1) << r.out;
  EXPECT_NE(r.out.find("action-simulation"), std::string::npos) << r.out;
}

TEST_F(Cli, Pos)
{
  const auto r = run("pos --machine MCP0");
  EXPECT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("MCP0/stopBloodPumping/inv5/INV"), std::string::npos) << r.out;
  EXPECT_EQ(run("pos --machine Nope").code, 2);
}

TEST_F(Cli, Animate)
{
  auto r = run("animate " + q(kCorpus / "scenarios" / "mbp0_no_flow.scn") + " --trace t.jsonl");
  EXPECT_EQ(r.code, 0) << r.out;
  std::ifstream trace(dir_ / "t.jsonl");
  std::string line;
  int rows = 0;
  while (std::getline(trace, line)) {
    nlohmann::json::parse(line);
    ++rows;
  }
  EXPECT_EQ(rows, 1 + 1 + 1 + 121 + 1);

  EXPECT_EQ(run("animate " + q(kCorpus / "scenarios" / "mbp0_wrong_alarm.scn")).code, 1);
  EXPECT_EQ(run("animate " + q(write("bad.scn", "machine MCP0\nbogus\n"))).code, 2);
  EXPECT_EQ(run("animate " + q(write("unknown.scn", "machine MCP0\nfire nothing\n"))).code, 2);
  EXPECT_EQ(run("animate " + q(dir_ / "missing.scn")).code, 2);
}

TEST_F(Cli, UsageAndParseErrors)
{
  EXPECT_EQ(run("").code, 2);
  EXPECT_EQ(run("frobnicate").code, 2);
  EXPECT_EQ(run("check --mode sideways").code, 2);
  const auto r = run("check " + q(write("broken.ebs", "MACHINE M VARIABLES EVENTS END")));
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.out.find("broken.ebs"), std::string::npos) << r.out;
}

TEST_F(Cli, BoundsFile)
{
  const auto bounds = write("small.bounds", "bound bloodPumpingTime 0 5\nbound noFlowDetectionTime 0 5\n"
                                            "bound fillingBloodVolume 0 5\nbound dialysateTemperature 0 5\n"
                                            "bound actualBloodFlow 0 5\nconst SetBloodFlow 1\ncap 10\n");
  // Ten states are not enough for the flow chain.
  EXPECT_EQ(run("check --machine MCP1 --bounds " + q(bounds)).code, 1);
  EXPECT_EQ(run("check --bounds " + q(write("junk.bounds", "what is this\n"))).code, 2);
}

}  // namespace
