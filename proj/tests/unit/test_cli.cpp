// Drives the fairprobe executable end to end.

#include <gtest/gtest.h>

#include <cstdlib>
#include <sstream>

#include <sys/wait.h>

#include <json.hpp>

#include "fairprobe/models.hpp"
#include "fairprobe/report.hpp"
#include "helpers.hpp"

using namespace fairprobe;
using namespace fairprobe::testing;
using nlohmann::json;

namespace {

struct CliRun {
  int status = -1;
  std::string out;
  std::string err;
};

class Cli : public ::testing::Test {
 protected:
  TempDir tmp;
  std::filesystem::path domain = tmp.file("grid.domain", format_domain(grid_domain()));

  CliRun run(const std::string& args, const std::string& env = "") {
    const auto out = tmp.path / "stdout.txt";
    const auto err = tmp.path / "stderr.txt";
    const auto cmd = "cd '" + tmp.path.string() + "' && " + env + (env.empty() ? "" : " ") + "'" +
                     std::string(FAIRPROBE_CLI) + "' " + args + " >'" + out.string() + "' 2>'" +
                     err.string() + "'";
    const int raw = std::system(cmd.c_str());
    CliRun r;
    r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
    r.out = slurp(out);
    r.err = slurp(err);
    return r;
  }

  std::filesystem::path planted(const std::string& name, const std::string& body) {
    return tmp.file(name, "biased_param = g\nbiased_value = 1\n" + body);
  }

  // Label +1 iff x0 >= 50, flipped to -1 for g == 1 in the x1 band 40..59.
  std::filesystem::path biased_csv() {
    std::ostringstream csv;
    csv << "x0,x1,g,label\n";
    Rng rng(5);
    for (int i = 0; i < 400; ++i) {
      const auto x0 = rng.uniform_int(0, 99), x1 = rng.uniform_int(0, 99), g = rng.uniform_int(0, 1);
      int label = x0 >= 50 ? 1 : -1;
      if (g == 1 && x1 >= 40 && x1 <= 59) label = -1;
      csv << x0 << "," << x1 << "," << g << "," << label << "\n";
    }
    return tmp.file("train.csv", csv.str());
  }

  static json without_wall_time(const std::filesystem::path& report) {
    auto j = json::parse(slurp(report));
    j.erase("wall_time");
    return j;
  }

  std::string dom() const { return " --domain-file '" + domain.string() + "'"; }
};

std::string adapter(const std::string& args) {
  return std::string("python3 ") + FAIRPROBE_TEST_ADAPTER + " " + args;
}

}  // namespace

TEST_F(Cli, UsageErrorsExitTwo) {
  const auto csv = biased_csv();
  EXPECT_EQ(run("").status, 2);
  EXPECT_EQ(run("frobnicate").status, 2);
  EXPECT_EQ(run("train" + dom() + " --csv-file " + csv.string() + " --model-kind forest --out-path m").status, 2);
  const auto p = planted("p.txt", "region.x1 = 0..9\n");
  const auto k1 = run("estimate" + dom() + " --model-ref planted:" + p.string() + " --K 1 --report-out e.json");
  EXPECT_EQ(k1.status, 2);
  EXPECT_NE(k1.err.find("K must be at least 2"), std::string::npos);
  EXPECT_EQ(run("audit" + dom() + " --model-ref planted:" + p.string() + " --strategy annealing --report-out a.json").status, 2);
  EXPECT_EQ(run("audit" + dom() + " --model-ref planted:" + p.string() + " --delta-v 0 --report-out a.json").status, 2);
  EXPECT_EQ(run("audit" + dom() + " --model-ref planted:nope.txt --report-out a.json").status, 2);
  EXPECT_EQ(run("audit" + dom() + " --model-ref planted:" + p.string() + " --report-out a.json", "FAIRPROBE_SEED=x").status, 2);
}

TEST_F(Cli, TrainIsByteIdentical) {
  const auto csv = biased_csv();
  for (const std::string kind : {"tree", "logistic"}) {
    const auto base = "train" + dom() + " --csv-file " + csv.string() + " --model-kind " + kind + " --seed 4 --out-path ";
    ASSERT_EQ(run(base + "a.model").status, 0);
    ASSERT_EQ(run(base + "b.model").status, 0);
    const auto a = slurp(tmp.path / "a.model");
    EXPECT_EQ(a, slurp(tmp.path / "b.model"));
    EXPECT_NE(a.find("fairprobe-model-v1"), std::string::npos);
    EXPECT_EQ(to_string(load_model(tmp.path / "a.model", grid_domain())->kind()), kind);
  }
  // Bound violation in the CSV is a usage error.
  const auto bad = tmp.file("bad.csv", "x0,x1,g,label\n1,2,7,1\n");
  const auto r = run("train" + dom() + " --csv-file " + bad.string() + " --model-kind tree --out-path c.model");
  EXPECT_EQ(r.status, 2);
  EXPECT_NE(r.err.find("g"), std::string::npos);
}

TEST_F(Cli, AuditIsDeterministic) {
  const auto p = planted("p.txt", "region.x1 = 40..44\n");
  const auto args = "audit" + dom() + " --model-ref planted:" + p.string() +
                    " --global-trials 500 --local-trials 200 --seed 21 --report-out ";
  ASSERT_EQ(run(args + "a.json").status, 0);
  ASSERT_EQ(run(args + "b.json").status, 0);
  EXPECT_EQ(without_wall_time(tmp.path / "a.json"), without_wall_time(tmp.path / "b.json"));
  const auto r = read_report(tmp.path / "a.json");
  ASSERT_TRUE(r.audit);
  EXPECT_EQ(r.command, "audit");
  EXPECT_EQ(r.domain_digest, grid_domain().digest());
  EXPECT_EQ(r.audit->config.seed, 21u);
  EXPECT_GT(r.audit->discriminatory_count, 0u);
}

TEST_F(Cli, SeedFallsBackToEnvironment) {
  const auto p = planted("p.txt", "region.x1 = 40..44\n");
  const auto args = "audit" + dom() + " --model-ref planted:" + p.string() + " --global-trials 300 --local-trials 50";
  ASSERT_EQ(run(args + " --seed 77 --report-out flag.json").status, 0);
  ASSERT_EQ(run(args + " --report-out env.json", "FAIRPROBE_SEED=77").status, 0);
  ASSERT_EQ(run(args + " --report-out zero.json").status, 0);
  EXPECT_EQ(without_wall_time(tmp.path / "flag.json"), without_wall_time(tmp.path / "env.json"));
  EXPECT_EQ(read_report(tmp.path / "zero.json").audit->config.seed, 0u);
}

TEST_F(Cli, AuditStopsAtMaxFindings) {
  const auto p = planted("all.txt", "");
  ASSERT_EQ(run("audit" + dom() + " --model-ref planted:" + p.string() + " --max-findings 100 --report-out a.json").status, 0);
  const auto r = read_report(tmp.path / "a.json");
  EXPECT_EQ(r.audit->discriminatory_count, 100u);
  EXPECT_EQ(r.audit->stop_reason, StopReason::max_findings);
}

TEST_F(Cli, Estimate) {
  const auto fair = planted("fair.txt", "empty = true\n");
  ASSERT_EQ(run("estimate" + dom() + " --model-ref planted:" + fair.string() + " --m 200 --K 10 --report-out z.json").status, 0);
  const auto z = read_report(tmp.path / "z.json");
  EXPECT_EQ(z.estimation->result.point_estimate, 0.0);
  EXPECT_EQ(z.estimation->result.ci_low, 0.0);
  EXPECT_EQ(z.estimation->result.ci_high, 0.0);

  const auto ten = planted("ten.txt", "region.x1 = 0..9\n");
  const auto r = run("estimate" + dom() + " --model-ref planted:" + ten.string() +
                     " --m 1000 --K 100 --seed 8 --report-out t.json");
  ASSERT_EQ(r.status, 0);
  EXPECT_NE(r.out.find("estimated discriminatory inputs"), std::string::npos);
  const auto t = read_report(tmp.path / "t.json").estimation->result;
  EXPECT_NEAR(t.point_estimate, 10.0, 1.0);
  EXPECT_LE(t.ci_low, t.point_estimate);
  EXPECT_GE(t.ci_high, t.point_estimate);
  EXPECT_EQ(t.trials, 100u);
  EXPECT_EQ(t.samples_per_trial, 1000u);
}

TEST_F(Cli, RetrainReducesPlantedBias) {
  const auto csv = biased_csv();
  ASSERT_EQ(run("train" + dom() + " --csv-file " + csv.string() + " --model-kind tree --out-path t.model").status, 0);
  ASSERT_EQ(run("audit" + dom() + " --model-ref model:t.model --global-trials 1000 --local-trials 200 --seed 3 "
                "--report-out audit.json").status,
            0);
  const auto r = run("retrain" + dom() + " --model-kind tree --csv-file " + csv.string() +
                     " --findings-file audit.json --m 1000 --K 50 --seed 3 --report-out re.json");
  ASSERT_EQ(r.status, 0) << r.err;
  const auto re = read_report(tmp.path / "re.json");
  ASSERT_TRUE(re.retrain);
  EXPECT_GT(re.retrain->improvement_percent, 0.0);
  EXPECT_LT(re.retrain->final_estimate, re.retrain->initial_estimate);
  EXPECT_LE(re.retrain->iterations.size(), 9u);
  EXPECT_TRUE(std::filesystem::exists(tmp.path / "re.model"));
  EXPECT_EQ(load_model(tmp.path / "re.model", grid_domain())->digest(), re.retrain->final_model_digest);
}

TEST_F(Cli, RetrainRejectsUnusableFindings) {
  const auto csv = biased_csv();
  const auto fair = planted("fair.txt", "empty = true\n");
  ASSERT_EQ(run("audit" + dom() + " --model-ref planted:" + fair.string() + " --global-trials 100 --report-out none.json").status, 0);
  const auto empty = run("retrain" + dom() + " --model-kind tree --csv-file " + csv.string() +
                         " --findings-file none.json --report-out re.json");
  EXPECT_EQ(empty.status, 2);
  EXPECT_NE(empty.err.find("no discriminatory inputs"), std::string::npos);

  // Findings produced on a different domain.
  const auto other = tmp.file("other.domain", format_domain(grid_domain(50)));
  const auto p = planted("p.txt", "");
  ASSERT_EQ(run("audit --domain-file " + other.string() + " --model-ref planted:" + p.string() +
                " --global-trials 10 --local-trials 5 --report-out other.json").status,
            0);
  const auto mismatch = run("retrain" + dom() + " --model-kind tree --csv-file " + csv.string() +
                            " --findings-file other.json --report-out re.json");
  EXPECT_EQ(mismatch.status, 2);
  EXPECT_NE(mismatch.err.find("domain"), std::string::npos);
}

TEST_F(Cli, CompareSingleSeed) {
  const auto p = planted("all.txt", "");
  const auto r = run("compare" + dom() + " --model-ref planted:" + p.string() + " --seeds 4 --budget 2000 --report-out c.json");
  ASSERT_EQ(r.status, 0) << r.err;
  const auto c = read_report(tmp.path / "c.json").compare;
  ASSERT_TRUE(c);
  ASSERT_EQ(c->rows.size(), 4u);
  for (const auto& row : c->rows) {
    ASSERT_EQ(row.percent.size(), 1u);
    EXPECT_DOUBLE_EQ(row.median_percent, 100.0) << to_string(row.strategy);
    EXPECT_EQ(row.inputs[0], 2000u);
    EXPECT_NE(r.out.find(std::string(to_string(row.strategy))), std::string::npos);
  }
}

TEST_F(Cli, ExternalFailureWritesPartialReport) {
  const auto model = adapter("--params 3 --model linear:0,0,1:-0.5:0,0,0:99,99,1 --fault die --fault-after 40");
  const auto r = run("audit" + dom() + " --model-ref \"external:" + model + "\" --report-out part.json");
  EXPECT_EQ(r.status, 1);
  EXPECT_NE(r.err.find("partial report"), std::string::npos);
  const auto rep = read_report(tmp.path / "part.json");
  ASSERT_TRUE(rep.error);
  // An input and its variants go out as one batch: 40 answered requests, 40 inputs.
  EXPECT_EQ(rep.audit->inputs_generated, 40u);
  EXPECT_EQ(rep.audit->discriminatory_count, 40u);
}
