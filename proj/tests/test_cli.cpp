#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdio>
#include <filesystem>

#include "flexkit/lifecycle.hpp"
#include "support.hpp"
#include "turtle.hpp"

namespace fs = std::filesystem;
using testkit::fixture_path;
using testkit::read_text;

namespace {

struct CliRun {
  int code = -1;
  std::string out;
};

CliRun run(const std::string& args, const std::string& env = "") {
  const std::string cmd = env + (env.empty() ? "" : " ") + FLEXKIT_CLI + " " + args + " 2>/dev/null";
  CliRun r;
  FILE* p = popen(cmd.c_str(), "r");
  if (p == nullptr) return r;
  char buf[4096];
  std::size_t n;
  while ((n = fread(buf, 1, sizeof buf, p)) > 0) r.out.append(buf, n);
  const int status = pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string fx(const std::string& name) { return fixture_path(name); }

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("flexkit-cli-" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string tmp(const std::string& name) const { return (dir_ / name).string(); }

  fs::path dir_;
};

}  // namespace

TEST_F(Cli, ValidateFixture) {
  const CliRun r = run("validate --in " + fx("sfo.json"));
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("\nfeasible\n"), std::string::npos) << r.out;
}

TEST_F(Cli, ValidateInfeasibleSchedule) {
  flexkit::Json j = flexkit::Json::parse(read_text(fx("sfo.json")));
  j["flexOffer"]["defaultSchedule"]["scheduleSlices"][4]["energyAmount"] = 0.538;
  std::ofstream(tmp("bad.json")) << j.dump();
  const CliRun r = run("validate --in " + tmp("bad.json"));
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.out.find("slice 5"), std::string::npos) << r.out;
}

TEST_F(Cli, ToleranceFromEnvironment) {
  flexkit::Json j = flexkit::Json::parse(read_text(fx("sfo.json")));
  j["flexOffer"]["defaultSchedule"]["scheduleSlices"][0]["energyAmount"] = 0.4781;
  std::ofstream(tmp("edge.json")) << j.dump();
  EXPECT_EQ(run("validate --in " + tmp("edge.json")).code, 2);
  EXPECT_EQ(run("validate --in " + tmp("edge.json"), "FLEXKIT_TOLERANCE=0.001").code, 0);
  EXPECT_EQ(run("validate --in " + tmp("edge.json"), "FLEXKIT_TOLERANCE=abc").code, 1);
}

TEST_F(Cli, OptimizeTecfo) {
  const CliRun r = run("optimize --in " + fx("tecfo.json") + " --prices " + fx("prices.csv"));
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("objective: 0.156540\n"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("4,0.471000,0.030000\n"), std::string::npos) << r.out;
  EXPECT_EQ(run("optimize --in " + fx("tecfo.json") + " --prices " + fx("prices.csv")).out, r.out);
}

TEST_F(Cli, OptimizeWritesScheduledMessage) {
  ASSERT_EQ(run("optimize --in " + fx("sfo.json") + " --prices " + fx("prices.csv") + " --out " + tmp("o.json")).code, 0);
  const flexkit::FlexOffer fo = flexkit::parse_message(read_text(tmp("o.json")));
  ASSERT_TRUE(fo.flexoffer_schedule);
  EXPECT_TRUE(flexkit::check_schedule(fo, *fo.flexoffer_schedule).feasible);
}

TEST_F(Cli, Thresh) {
  const CliRun r = run("thresh --in " + fx("ufo.json") + " --p0 1");
  EXPECT_EQ(r.code, 0);
  double lo = 0, hi = 0;
  const auto pos = r.out.find("slice 2: [");
  ASSERT_NE(pos, std::string::npos) << r.out;
  ASSERT_EQ(std::sscanf(r.out.c_str() + pos, "slice 2: [%lf, %lf]", &lo, &hi), 2);
  EXPECT_NEAR(lo, 0.324, 1e-3);
  EXPECT_NEAR(hi, 0.427, 1e-3);
  EXPECT_EQ(run("thresh --in " + fx("sfo.json") + " --p0 1").code, 1);
}

TEST_F(Cli, UsageAndIoErrors) {
  EXPECT_EQ(run("validate --in " + fx("sfo.json") + " --bogus").code, 1);
  EXPECT_EQ(run("").code, 1);
  EXPECT_EQ(run("frobnicate").code, 1);
  EXPECT_EQ(run("validate --in " + tmp("missing.json")).code, 3);
  EXPECT_EQ(run("optimize --in " + fx("sfo.json") + " --prices " + tmp("missing.csv")).code, 3);
  std::ofstream(tmp("bad.csv")) << "price\n0.1\n";
  EXPECT_EQ(run("optimize --in " + fx("sfo.json") + " --prices " + tmp("bad.csv")).code, 1);
  EXPECT_EQ(run("optimize --in " + fx("sfo.json") + " --prices " + fx("prices4.csv")).code, 1);
}

TEST_F(Cli, FailedCommandsLeaveNoOutputFile) {
  EXPECT_NE(run("aggregate --in " + fx("dfo.json") + " --out " + tmp("agg.json")).code, 0);
  EXPECT_NE(run("gen --model " + tmp("nope.cfg") + " --kind sfo --out " + tmp("g.json")).code, 0);
  EXPECT_EQ(run("export-rdf --in " + fx("sfo.json") + " --out " + tmp("no-dir/x.ttl")).code, 3);
  for (const auto& e : fs::directory_iterator(dir_)) ADD_FAILURE() << "left behind " << e.path();
}

TEST_F(Cli, InfeasibleOptimization) {
  flexkit::Json j = flexkit::Json::parse(read_text(fx("tecfo.json")));
  j["flexOffer"]["flexOfferProfileConstraints"][8]["TotalEnergyConstraints"][0] = {{"lower", 4.0}, {"upper", 5.0}};
  std::ofstream(tmp("tec.json")) << j.dump();
  const CliRun r = run("optimize --in " + tmp("tec.json") + " --prices " + fx("prices.csv"));
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.out.find("status: infeasible"), std::string::npos);
}

TEST_F(Cli, GenerateValidateAndMetric) {
  for (const char* kind : {"sfo", "tecfo", "dfo"}) {
    const std::string out = tmp(std::string(kind) + ".json");
    ASSERT_EQ(run("gen --model " + fx("heatpump.cfg") + " --kind " + kind + " --out " + out).code, 0);
    EXPECT_EQ(run("validate --in " + out).code, 0);
  }
  EXPECT_EQ(run("gen --model " + fx("heatpump.cfg") + " --kind ufo --out " + tmp("u.json")).code, 1);
  const CliRun m = run("metric --model " + fx("heatpump.cfg") + " --prices " + fx("prices_negative.csv"));
  EXPECT_EQ(m.code, 0);
  EXPECT_EQ(m.out.rfind("model_kind,baseline_cost,optimized_cost,profit,retained\n", 0), 0u);
  EXPECT_NE(m.out.find("\nDFO,"), std::string::npos);
  const CliRun ref = run("metric --reference");
  EXPECT_NE(ref.out.find("not reproduced"), std::string::npos);
}

TEST_F(Cli, AggregateThenDisaggregate) {
  const std::string a = tmp("a.json"), b = tmp("b.json");
  flexkit::FlexOffer fa = testkit::load_fixture("tecfo.json");
  flexkit::FlexOffer fb = testkit::load_fixture("sfo.json");
  fb.id = "second";
  std::ofstream(a) << flexkit::serialize_message(fa);
  std::ofstream(b) << flexkit::serialize_message(fb);
  ASSERT_EQ(run("aggregate --in " + a + " " + b + " --out " + tmp("agg.json")).code, 0);
  ASSERT_EQ(run("optimize --in " + tmp("agg.json") + " --prices " + fx("prices.csv") + " --out " + tmp("aggs.json")).code,
            0);
  const CliRun d = run("disaggregate --agg " + tmp("agg.json") + " --schedule " + tmp("aggs.json") + " --members " + a +
                    " " + b + " --out " + tmp("parts.json"));
  EXPECT_EQ(d.code, 0);
  EXPECT_NE(d.out.find("second,8,"), std::string::npos) << d.out;
  const flexkit::Json parts = flexkit::Json::parse(read_text(tmp("parts.json")));
  ASSERT_EQ(parts.size(), 2u);
  // a subset of the members forms a different aggregate
  EXPECT_EQ(run("disaggregate --agg " + tmp("agg.json") + " --schedule " + tmp("aggs.json") + " --members " + b).code,
            1);
}

TEST_F(Cli, PlotSimulateExportCoverageFmt) {
  ASSERT_EQ(run("plot --in " + fx("sfo.json") + " --out " + tmp("p.csv")).code, 0);
  const std::string csv = read_text(tmp("p.csv"));
  EXPECT_EQ(csv.rfind("slice,lower,upper,schedule\n1,0.303000,0.478000,0.423000\n", 0), 0u) << csv;
  ASSERT_EQ(run("plot --in " + fx("ufo.json") + " --out " + tmp("u.csv") + " --p0 1").code, 0);
  EXPECT_NE(read_text(tmp("u.csv")).find("2,0.323984,0.426984,"), std::string::npos);

  const CliRun s = run("simulate --n 3 --prices " + fx("prices.csv") + " --policy accept-all --log " + tmp("log.jsonl"));
  EXPECT_EQ(s.code, 0);
  EXPECT_NE(s.out.find("prosumer-3-fo,executed,"), std::string::npos) << s.out;
  std::vector<std::string> lines;
  std::istringstream in(read_text(tmp("log.jsonl")));
  for (std::string l; std::getline(in, l);) lines.push_back(l);
  const auto replayed = flexkit::replay(lines);
  EXPECT_EQ(replayed.size(), 3u);
  EXPECT_EQ(run("simulate --n 2 --prices " + fx("prices.csv") + " --policy sometimes").code, 1);

  const CliRun ttl = run("export-rdf --in " + fx("dfo.json"));
  EXPECT_EQ(ttl.code, 0);
  EXPECT_NO_THROW(turtle::parse(ttl.out));
  EXPECT_NE(run("coverage --in " + fx("dfo.json")).out.find("dco-only"), std::string::npos);
  EXPECT_EQ(run("fmt --in " + fx("tecfo.json")).out, read_text(fx("tecfo.json")));
}
