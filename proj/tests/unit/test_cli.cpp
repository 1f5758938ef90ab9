#include <gtest/gtest.h>

#include <json.hpp>
#include <sstream>

#include "cli_harness.hpp"

using nlohmann::json;
using seqcp::testing::CliRun;
using seqcp::testing::run_cli;
using seqcp::testing::slurp;
using seqcp::testing::spit;
using seqcp::testing::TempDir;

namespace {

int count_lines(const std::string& s) {
  int n = 0;
  for (char c : s) n += c == '\n';
  return n;
}

}  // namespace

TEST(CliDetect, StepExample) {
  TempDir tmp;
  spit(tmp.file("step.csv"), "y\n0\n0\n0\n10\n10\n10\n");
  const CliRun r = run_cli({"detect", "-i", tmp.file("step.csv"), "-m", "gaussian", "--method", "pelt",
                            "--beta", "1"});
  ASSERT_EQ(r.code, 0) << r.err;
  const json j = json::parse(r.out);
  EXPECT_EQ(j["change_points"], json::array({3}));
  EXPECT_DOUBLE_EQ(j["objective"].get<double>(), 2.0);
  EXPECT_EQ(j["segments"].size(), 2u);
  EXPECT_EQ(j["segments"][1]["start"], 4);
  EXPECT_EQ(j["segments"][1]["end"], 6);
  EXPECT_DOUBLE_EQ(j["segments"][1]["theta"][0].get<double>(), 10.0);
}

TEST(CliDetect, EmptyChangeSetAndOutputFile) {
  TempDir tmp;
  spit(tmp.file("flat.csv"), "y\n1\n1\n1\n1\n");
  const CliRun r = run_cli({"detect", "-i", tmp.file("flat.csv"), "-m", "gaussian", "--method", "dp",
                            "-o", tmp.file("out.json")});
  ASSERT_EQ(r.code, 0) << r.err;
  const json j = json::parse(slurp(tmp.file("out.json")));
  EXPECT_TRUE(j["change_points"].is_array());
  EXPECT_TRUE(j["change_points"].empty());
  EXPECT_EQ(j["method"], "dp");
}

TEST(CliDetect, ErrorsExitWithUsageCode) {
  TempDir tmp;
  EXPECT_EQ(run_cli({"detect", "-i", tmp.file("missing.csv"), "-m", "logistic"}).code, 2);
  spit(tmp.file("bad.csv"), "y,x1\n1,2\n1,zz\n");
  const CliRun bad = run_cli({"detect", "-i", tmp.file("bad.csv"), "-m", "logistic"});
  EXPECT_EQ(bad.code, 2);
  EXPECT_NE(bad.err.find("line 3"), std::string::npos);
  spit(tmp.file("neg.csv"), "y,x1\n-1,2\n1,1\n");
  EXPECT_EQ(run_cli({"detect", "-i", tmp.file("neg.csv"), "-m", "poisson"}).code, 2);
  EXPECT_EQ(run_cli({"detect", "-m", "logistic"}).code, 2);
  EXPECT_EQ(run_cli({"detect", "-i", tmp.file("neg.csv"), "-m", "probit"}).code, 2);
  EXPECT_EQ(run_cli({"--help"}).code, 0);
}

TEST(CliDetect, SortByColumn) {
  TempDir tmp;
  spit(tmp.file("t.csv"), "y,time\n10,1\n10,2\n10,3\n0,4\n0,5\n0,6\n");
  const CliRun r = run_cli({"detect", "-i", tmp.file("t.csv"), "-m", "gaussian", "--method", "pelt",
                            "--beta", "1", "--sort-by-column", "time"});
  ASSERT_EQ(r.code, 0) << r.err;
  const json j = json::parse(r.out);
  EXPECT_EQ(j["d"], 0);
  EXPECT_EQ(j["change_points"], json::array({3}));
  EXPECT_DOUBLE_EQ(j["segments"][0]["theta"][0].get<double>(), 0.0);
}

TEST(CliSimulate, TruthAndDeterminism) {
  TempDir tmp;
  const CliRun a = run_cli({"simulate", "--family", "logistic", "-k", "1", "-T", "1500", "--seed", "4",
                            "-o", tmp.file("a.csv"), "--truth", tmp.file("a.json")});
  ASSERT_EQ(a.code, 0) << a.err;
  const CliRun b = run_cli({"simulate", "--family", "logistic", "-k", "1", "-T", "1500", "--seed", "4",
                            "-o", tmp.file("b.csv")});
  ASSERT_EQ(b.code, 0) << b.err;
  EXPECT_EQ(slurp(tmp.file("a.csv")), slurp(tmp.file("b.csv")));
  EXPECT_EQ(count_lines(slurp(tmp.file("a.csv"))), 1501);
  const json truth = json::parse(slurp(tmp.file("a.json")));
  EXPECT_EQ(truth["change_points"], json::array({750}));

  const CliRun none = run_cli({"simulate", "-k", "0", "-T", "100", "--truth", tmp.file("z.json")});
  ASSERT_EQ(none.code, 0);
  EXPECT_TRUE(json::parse(slurp(tmp.file("z.json")))["change_points"].empty());
  EXPECT_EQ(none.out.substr(0, 5), "y,x1\n");
}

TEST(CliSimulate, LassoDefaultsToFiftyCovariates) {
  const CliRun r = run_cli({"simulate", "--family", "lasso", "-T", "40", "-k", "1"});
  ASSERT_EQ(r.code, 0) << r.err;
  const std::string header = r.out.substr(0, r.out.find('\n'));
  EXPECT_NE(header.find(",x50"), std::string::npos);
  EXPECT_EQ(header.find(",x51"), std::string::npos);
}

TEST(CliSimulate, InvalidFieldNamed) {
  const CliRun r = run_cli({"simulate", "-k", "2"});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("'k'"), std::string::npos);
  const CliRun m = run_cli({"simulate", "--magnitude", "zero"});
  EXPECT_EQ(m.code, 2);
  EXPECT_NE(m.err.find("magnitude"), std::string::npos);
}

TEST(CliBench, RowCardinalityAndHeader) {
  TempDir tmp;
  const CliRun r = run_cli({"bench", "--family", "logistic,poisson", "-T", "60", "-d", "1", "-k", "1",
                            "--methods", "pelt,se", "--reps", "3", "-o", tmp.file("b.csv")});
  ASSERT_EQ(r.code, 0) << r.err;
  const std::string csv = slurp(tmp.file("b.csv"));
  EXPECT_EQ(csv.substr(0, csv.find('\n')),
            "scenario,family,T,d,k,magnitude,seed,method,rand_index,k_detected,elapsed_s,objective,status");
  EXPECT_EQ(count_lines(csv), 13);
  const json meta = json::parse(slurp(tmp.file("b.csv.meta.json")));
  EXPECT_EQ(meta["reps"], 3);
  EXPECT_EQ(meta["scenarios"].size(), 2u);
  EXPECT_NE(r.out.find("mean_rand_index"), std::string::npos);
}

TEST(CliConverge, WritesRows) {
  const CliRun r = run_cli({"converge", "--n-grid", "50,100", "--seeds", "2", "--mu", "auto,0.5"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out.substr(0, r.out.find('\n')), "n,seed,gap,mu");
  EXPECT_EQ(count_lines(r.out), 1 + 2 * 2 * 2);
  EXPECT_NE(r.err.find("slope"), std::string::npos);
}

TEST(CliConfig, FileValuesAndPrecedence) {
  TempDir tmp;
  spit(tmp.file("step.csv"), "y\n0\n0\n0\n10\n10\n10\n");
  spit(tmp.file("run.conf"), "# detection settings\nmethod = pelt\nbeta = 1000\nmodel = \"gaussian\"\n");
  const CliRun big = run_cli({"detect", "--config", tmp.file("run.conf"), "-i", tmp.file("step.csv")});
  ASSERT_EQ(big.code, 0) << big.err;
  EXPECT_TRUE(json::parse(big.out)["change_points"].empty());
  EXPECT_EQ(json::parse(big.out)["method"], "pelt");
  const CliRun cli_wins =
      run_cli({"detect", "--config", tmp.file("run.conf"), "-i", tmp.file("step.csv"), "--beta", "1"});
  ASSERT_EQ(cli_wins.code, 0) << cli_wins.err;
  EXPECT_EQ(json::parse(cli_wins.out)["change_points"], json::array({3}));

  spit(tmp.file("bad.conf"), "betta = 3\n");
  const CliRun bad = run_cli({"detect", "--config", tmp.file("bad.conf"), "-i", tmp.file("step.csv"),
                              "-m", "gaussian"});
  EXPECT_EQ(bad.code, 2);
  EXPECT_NE(bad.err.find("betta"), std::string::npos);
}
