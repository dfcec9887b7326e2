#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdio>
#include <fstream>
#include <sstream>

#include "support.hpp"

using namespace jlt;
using namespace testing_support;

namespace {

struct CliRun {
  int code = -1;
  std::string out;
  std::string err;
};

std::string tmp(const std::string& name) { return ::testing::TempDir() + "jlt_cli_" + name; }

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

CliRun run(const std::string& args, const std::string& env = "") {
  const std::string out = tmp("stdout"), err = tmp("stderr");
  const std::string cmd = env + " " + JLT_CLI_PATH + " " + args + " >" + out + " 2>" + err;
  const int status = std::system(cmd.c_str());
  CliRun r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = slurp(out);
  r.err = slurp(err);
  return r;
}

std::string write_operator(const std::string& name, const AnyOperator& op) {
  const std::string path = tmp(name);
  std::ofstream(path) << serialize(op);
  return path;
}

}  // namespace

TEST(Cli, HelpAndUsage) {
  EXPECT_EQ(run("--help").code, 0);
  EXPECT_EQ(run("").code, 2);
  const std::string path = write_operator("usage.json", free_operator());
  const CliRun bad = run("spectrum --input " + path + " --bogus 3");
  EXPECT_EQ(bad.code, 2);
  EXPECT_NE(bad.err.find("--bogus"), std::string::npos);
  EXPECT_EQ(run("spectrum --input " + tmp("missing.json")).code, 2);
  EXPECT_EQ(run("nosuchcommand").code, 2);
}

TEST(Cli, MalformedOperatorIsUsageError) {
  const std::string path = tmp("bad.json");
  std::ofstream(path) << R"({"kind":"scalar","a":[0.5],"b":[1]})";
  const CliRun r = run("spectrum --input " + path);
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("NonNegativeOffDiagonal"), std::string::npos);
}

TEST(Cli, Spectrum) {
  const std::string path = write_operator("delta.json", single_site(-3.0));
  const CliRun r = run("spectrum --input " + path + " --tol 1e-9");
  ASSERT_EQ(r.code, 0) << r.err;
  const json j = json::parse(r.out);
  ASSERT_EQ(j.at("points").size(), 1u);
  EXPECT_NEAR(j["points"][0]["lambda"].get<double>(), -std::sqrt(13.0), 1e-9);
  EXPECT_EQ(j["kind"], "scalar");
  const CliRun t = run("spectrum --input " + path + " --method truncation");
  ASSERT_EQ(t.code, 0) << t.err;
  EXPECT_GT(json::parse(t.out)["truncation_used"].get<int>(), 0);
}

TEST(Cli, SpectrumTruncationCapIsNumericalFailure) {
  const std::string path = write_operator("weak.json", single_site(-0.02));
  const CliRun r = run("spectrum --input " + path + " --method truncation --max-truncation 64");
  EXPECT_EQ(r.code, 3);
  EXPECT_NE(r.err.find("NoConvergence"), std::string::npos);
}

TEST(Cli, VerifyFreeOperator) {
  const std::string path = write_operator("free.json", free_operator());
  const CliRun r = run("verify --input " + path);
  ASSERT_EQ(r.code, 0) << r.err;
  const json j = json::parse(r.out);
  ASSERT_TRUE(j.is_array());
  for (const auto& rep : j) {
    EXPECT_TRUE(rep["passed"].get<bool>());
    EXPECT_EQ(rep["lhs"].get<double>(), 0.0);
  }
}

TEST(Cli, VerifyLooseToleranceFails) {
  const std::string path =
      write_operator("two.json", make_scalar(0, {-1, -1, -1, -1}, {-1.5, 0.5, -2.0, 0.3}));
  EXPECT_EQ(run("verify --input " + path).code, 0);
  const CliRun r = run("verify --input " + path + " --tol 10");
  EXPECT_EQ(r.code, 3);
  EXPECT_NE(r.err.find("NoConvergence"), std::string::npos);
}

TEST(Cli, VerifyNamesAndGamma) {
  const std::string path = write_operator("named.json", single_site(-3.0));
  const CliRun r = run("verify --input " + path + " --names hsmain,hs1 --gamma 1.5");
  ASSERT_EQ(r.code, 0) << r.err;
  const json j = json::parse(r.out);
  ASSERT_EQ(j.size(), 2u);
  EXPECT_EQ(j[0]["name"], "hsmain");
  EXPECT_EQ(j[1]["name"], "hs1");
  EXPECT_EQ(j[1]["gamma"].get<double>(), 1.5);
  EXPECT_NEAR(j[0]["lhs"].get<double>(), 3.0, 1e-10);
  EXPECT_EQ(run("verify --input " + path + " --names nope").code, 2);
  const std::string jit = write_operator("jit.json", make_scalar(0, {-1.2}, {-3.0}));
  EXPECT_EQ(run("verify --input " + jit + " --names hsfree").code, 2);
}

TEST(Cli, VerifyBlock) {
  const std::string path = write_operator("block.json", block_site(diag2(-3.0, 1.0)));
  const CliRun r = run("verify --input " + path);
  ASSERT_EQ(r.code, 0) << r.err;
  const json j = json::parse(r.out);
  EXPECT_EQ(j[0]["name"], "finalmatrix");
}

TEST(Cli, VerifyRandomIsDeterministic) {
  const std::string args = "verify --random --trials 1000 --seed 7 --names final,hsmain";
  const CliRun a = run(args, "JACOBI_LT_THREADS=1");
  const CliRun b = run(args, "JACOBI_LT_THREADS=3");
  ASSERT_EQ(a.code, 0) << a.err;
  EXPECT_EQ(a.out, b.out);
  const json j = json::parse(a.out);
  EXPECT_EQ(j["total_failures"].get<int>(), 0);
  EXPECT_EQ(j["trials"].get<int>(), 1000);
  const CliRun blk = run("verify --random --trials 50 --seed 3 --block-dim 2");
  ASSERT_EQ(blk.code, 0) << blk.err;
  EXPECT_EQ(json::parse(blk.out)["stats"][0]["name"], "finalmatrix");
}

TEST(Cli, CommuteReflectionless) {
  const std::string path = write_operator("refl.json", reflectionless_auto(1.0));
  const CliRun r = run("commute --input " + path);
  ASSERT_EQ(r.code, 0) << r.err;
  const json j = json::parse(r.out);
  ASSERT_EQ(j["steps"].size(), 1u);
  EXPECT_LT(j["chain_sum_residual"].get<double>(), 1e-8);
  EXPECT_NEAR(j["slack"].get<double>(), 0.0, 1e-6);
  const AnyOperator fin = operator_from_json(j["final_operator"]);
  EXPECT_TRUE(eigenvalues_outside_band(std::get<JacobiOperator>(fin)).points.empty());
}

TEST(Cli, CommuteBlock) {
  Matrix B = diag2(-3.0, 2.5);
  B(0, 1) = B(1, 0) = 0.4;
  const std::string path = write_operator("cblock.json", block_site(B));
  const CliRun r = run("commute --input " + path);
  ASSERT_EQ(r.code, 0) << r.err;
  const json j = json::parse(r.out);
  EXPECT_EQ(j["kind"], "block");
  EXPECT_EQ(j["steps"].size(), 2u);
  EXPECT_LT(j["steps"][0]["riccati_residual"].get<double>(), 1e-9);
}

TEST(Cli, GfunCsv) {
  const std::string args = "gfun --gamma 1 --lambda-min 2.001 --lambda-max 100 --points 200";
  const CliRun a = run(args, "JACOBI_LT_THREADS=1");
  const CliRun b = run(args, "JACOBI_LT_THREADS=4");
  ASSERT_EQ(a.code, 0) << a.err;
  EXPECT_EQ(a.out, b.out);
  std::istringstream in(a.out);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "lambda,gamma,G,R1,R2");
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, 200);
  EXPECT_NE(a.out.find("2.001,1,"), std::string::npos);
  const CliRun g2 = run("gfun --gamma 2 --points 3");
  ASSERT_EQ(g2.code, 0);
  EXPECT_NE(g2.out.find(",,\n"), std::string::npos);
  EXPECT_EQ(run("gfun --gamma 0.4").code, 2);
  EXPECT_EQ(run("gfun --lambda-min 1.5").code, 2);
}

TEST(Cli, ContinuumCsv) {
  const std::string args = "continuum --potential poschl_teller --param s=1 --domain 12 --gamma 1.5,0.5 --c 0.5 --k 16,32";
  const CliRun a = run(args, "JACOBI_LT_THREADS=1");
  const CliRun b = run(args, "JACOBI_LT_THREADS=2");
  ASSERT_EQ(a.code, 0) << a.err;
  EXPECT_EQ(a.out, b.out);
  EXPECT_EQ(a.out.substr(0, a.out.find('\n')), "gamma,c,k,lhs,rhs,ratio,bound,margin");
  EXPECT_NE(a.out.find("1.5,0.5,32,"), std::string::npos);
  EXPECT_EQ(run("continuum --potential square_well --param s=1").code, 2);
  EXPECT_EQ(run("continuum --potential nope").code, 2);
  EXPECT_EQ(run("continuum --c 1.5").code, 2);
}

TEST(Cli, OutputFile) {
  const std::string out = tmp("g.csv");
  ASSERT_EQ(run("gfun --points 4 --output " + out).code, 0);
  EXPECT_EQ(slurp(out).rfind("lambda,gamma,G,R1,R2\n", 0), 0u);
}
