// Acceptance run: one PASS/FAIL line per primary criterion. Exit status is
// nonzero when any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include <json.hpp>

#include "fairprobe/commands.hpp"
#include "fairprobe/digest.hpp"
#include "fairprobe/error.hpp"

using namespace fairprobe;

namespace {

// Report digest (wall_time removed) of the C8 audit. Any change to the search,
// the sampler or the report layout moves it.
constexpr const char* kGoldenAuditDigest = "55b7c93bf782497e";

ParameterSpec param(std::string name, Value lo, Value hi, bool is_protected = false) {
  ParameterSpec p;
  p.name = std::move(name);
  p.min_value = lo;
  p.max_value = hi;
  p.is_protected = is_protected;
  return p;
}

InputDomain grid() { return InputDomain({param("x0", 0, 99), param("x1", 0, 99), param("g", 0, 1, true)}); }

std::shared_ptr<const PlantedModel> band(const InputDomain& d, Value lo, Value hi) {
  PlantedBiasSpec s;
  s.region[1] = {lo, hi};
  s.biased_param = 2;
  s.biased_value = 1;
  return make_planted(d, s);
}

// Training labels: +1 iff x0 >= 50, forced to -1 for g == 1 inside x1 in [lo, lo + 19].
LabeledDataset biased_data(const InputDomain& d, std::uint64_t seed, Value lo, int rows) {
  Rng rng(seed);
  LabeledDataset data;
  for (int i = 0; i < rows; ++i) {
    const auto x = sample_uniform(d, rng);
    Label y = x[0] >= 50 ? 1 : -1;
    if (x[1] >= lo && x[1] <= lo + 19 && x[2] == 1) y = -1;
    data.rows.push_back({x, y});
  }
  return data;
}

struct Workspace {
  std::filesystem::path dir;
  Workspace() {
    dir = std::filesystem::temp_directory_path() / ("fairprobe-acceptance-" + std::to_string(::getpid()));
    std::filesystem::create_directories(dir);
  }
  ~Workspace() {
    std::error_code ec;
    std::filesystem::remove_all(dir, ec);
  }
  std::filesystem::path write(const std::string& name, const std::string& text) const {
    std::ofstream(dir / name, std::ios::binary) << text;
    return dir / name;
  }
};

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// ---- criteria --------------------------------------------------------------

Outcome c1_no_false_positives() {
  const auto d = grid();
  std::vector<std::pair<ModelHandle, std::string>> models;
  for (const auto& [lo, hi] : std::vector<std::pair<Value, Value>>{{40, 44}, {0, 9}, {70, 70}, {10, 59}})
    models.push_back({band(d, lo, hi), fmt("planted band %d..%d", static_cast<int>(lo), static_cast<int>(hi))});
  const auto data = biased_data(d, 1, 40, 400);
  models.push_back({train_tree(d, data, {}), "tree"});
  models.push_back({train_logistic(d, data, {}), "logistic"});

  std::uint64_t findings = 0, failures = 0;
  std::uint64_t seed = 0;
  for (const auto& [model, name] : models) {
    for (const auto s : kAllStrategies) {
      SearchConfig cfg;
      cfg.strategy = s;
      cfg.seed = ++seed;
      cfg.global_trials = s == Strategy::baseline_random ? 5000 : 500;
      cfg.local_trials = 500;
      Rng rng(cfg.seed);
      const auto suite = run_audit(*model, d, cfg, rng);
      for (const auto& f : suite.findings) {
        ++findings;
        if (!reverify(*model, f, d, cfg.discrimination)) ++failures;
      }
    }
  }
  return {findings >= 10000 && failures == 0,
          fmt("%llu findings, %llu failed re-verification", static_cast<unsigned long long>(findings),
              static_cast<unsigned long long>(failures))};
}

Outcome c2_estimator_accuracy() {
  const auto d = grid();
  const auto model = band(d, 40, 40);  // exactly 1% of the domain
  if (std::abs(model->exact_fraction() - 0.01) > 1e-15) return {false, "planted fraction is not 1%"};
  Rng rng(2024);
  const auto r = estimate_fraction(*model, d, {}, 1000, 400, rng);
  return {std::abs(r.point_estimate - 1.0) <= 0.3,
          fmt("estimate %.4f%% (CI %.4f .. %.4f), target 1.00 +- 0.3", r.point_estimate, r.ci_low, r.ci_high)};
}

Outcome c3_detection_curve() {
  Rng rng(33);
  constexpr int kBatches = 100000;
  bool ok = true;
  std::string detail;
  for (const std::uint64_t n : {10u, 100u, 1000u}) {
    int hits = 0;
    for (int b = 0; b < kBatches; ++b) {
      for (std::uint64_t i = 0; i < n; ++i) {
        if (rng.uniform01() < 0.01) {
          ++hits;
          break;
        }
      }
    }
    const double mc = static_cast<double>(hits) / kBatches;
    const double closed = detection_probability(0.01, n);
    ok = ok && std::abs(mc - closed) <= 0.005;
    detail += fmt("n=%llu closed %.5f mc %.5f; ", static_cast<unsigned long long>(n), closed, mc);
  }
  detail.resize(detail.size() - 2);
  return {ok, detail};
}

// Shared by C4 and C5: clustered planted model, region x1 in 40..44 (5% of the domain).
const CompareSummary& clustered_compare(const Workspace& ws) {
  static const CompareSummary summary = [&] {
    CompareArgs args;
    args.domain_file = ws.write("grid.domain", format_domain(grid()));
    const auto spec = ws.write("clustered.txt", "biased_param = g\nbiased_value = 1\nregion.x1 = 40..44\n");
    args.model_ref = "planted:" + spec.string();
    args.seeds = {1, 2, 3, 4, 5};
    args.budget = 20000;
    return *cmd_compare(args).compare;
  }();
  return summary;
}

double rate(const CompareSummary& s, Strategy strategy) {
  for (const auto& row : s.rows)
    if (row.strategy == strategy) return row.median_percent;
  throw ContractError("strategy missing from compare");
}

Outcome c4_directedness(const Workspace& ws) {
  const auto& s = clustered_compare(ws);
  const double full = rate(s, Strategy::fully_directed), base = rate(s, Strategy::baseline_random);
  return {full >= 3.0 * base, fmt("fully_directed %.3f%% vs baseline_random %.3f%% (%.2fx, need 3x)", full, base,
                                  base > 0 ? full / base : INFINITY)};
}

Outcome c5_ordering(const Workspace& ws) {
  const auto& s = clustered_compare(ws);
  const double full = rate(s, Strategy::fully_directed), semi = rate(s, Strategy::semi_directed),
               aeq = rate(s, Strategy::aequitas_random), base = rate(s, Strategy::baseline_random);
  return {full >= semi && semi >= aeq && aeq >= base,
          fmt("full %.3f >= semi %.3f >= aequitas %.3f >= baseline %.3f", full, semi, aeq, base)};
}

Outcome c6_state_fuzz() {
  Rng rng(66);
  std::vector<ParameterSpec> params;
  for (int i = 0; i < 7; ++i) params.push_back(param("p" + std::to_string(i), 0, 9, i == 3));
  const InputDomain d(params);
  ProbabilityState state(d);
  const auto free = state.params();
  std::uint64_t violations = 0;
  double worst_sum = 0.0;
  for (int step = 0; step < 100000; ++step) {
    SearchConfig cfg;
    // Mostly the default step sizes, sometimes much larger ones.
    if (rng.bernoulli(0.1)) {
      cfg.delta_v = rng.uniform_open(0.0, 1.0);
      cfg.delta_pr = rng.uniform_open(0.0, 1.0);
    }
    const auto p = free[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(free.size()) - 1))];
    const bool found = rng.bernoulli(0.5);
    const int delta = rng.bernoulli(0.5) ? 1 : -1;
    state = rng.bernoulli(0.5) ? update_full(std::move(state), p, found, delta, cfg)
                               : update_semi(std::move(state), p, found, delta, cfg);
    double sum = 0.0;
    bool ok = true;
    for (const auto q : free) {
      sum += state.sigma_pr(q);
      ok = ok && state.sigma_pr(q) >= 0.0 && state.sigma_v(q) >= 0.0 && state.sigma_v(q) <= 1.0;
    }
    worst_sum = std::max(worst_sum, std::abs(sum - 1.0));
    if (!ok || std::abs(sum - 1.0) > 1e-9) ++violations;
  }
  return {violations == 0, fmt("%llu violations in 100000 updates, max |sum - 1| = %.3g",
                               static_cast<unsigned long long>(violations), worst_sum)};
}

Outcome c7_retraining() {
  const auto d = grid();
  int terminated = 0, non_degraded = 0, strict = 0;
  std::string detail;
  for (int s = 0; s < 10; ++s) {
    const Value lo = 5 + 8 * s;
    const auto data = biased_data(d, 100 + s, lo, 400);
    const Trainer trainer = [&](const LabeledDataset& ds) -> ModelHandle { return train_tree(d, ds, {}); };
    const auto initial = trainer(data);
    SearchConfig cfg;
    cfg.global_trials = 1000;
    cfg.local_trials = 200;
    cfg.seed = 200 + s;
    Rng audit_rng(cfg.seed);
    const auto suite = run_audit(*initial, d, cfg, audit_rng);
    if (suite.unique_inputs.empty()) {
      detail += fmt("s%d: no findings; ", s);
      continue;
    }
    Rng rng(300 + s);
    const auto r = retrain_loop(trainer, d, data, suite, {1000, 50, {}}, rng, initial);
    terminated += r.iterations.size() <= 9;
    non_degraded += r.final_estimate <= r.initial_estimate;
    strict += r.final_estimate < r.initial_estimate;
    detail += fmt("s%d %.2f->%.2f; ", s, r.initial_estimate, r.final_estimate);
  }
  detail = fmt("terminated %d/10, non-degraded %d/10, strictly lower %d/10 [", terminated, non_degraded, strict) +
           detail.substr(0, detail.size() - 2) + "]";
  return {terminated == 10 && non_degraded == 10 && strict >= 7, detail};
}

Outcome c8_determinism(const Workspace& ws) {
  const auto d = grid();
  TrainArgs train;
  train.domain_file = ws.write("grid.domain", format_domain(d));
  train.csv_file = [&] {
    std::string csv = "x0,x1,g,label\n";
    for (const auto& row : biased_data(d, 8, 40, 400).rows)
      csv += fmt("%lld,%lld,%lld,%d\n", static_cast<long long>(row.input[0]), static_cast<long long>(row.input[1]),
                 static_cast<long long>(row.input[2]), static_cast<int>(row.label));
    return ws.write("train.csv", csv);
  }();
  train.model_kind = "tree";
  train.out_path = ws.dir / "tree.model";
  cmd_train(train);

  auto canonical = [&](const std::string& name) {
    AuditArgs a;
    a.domain_file = train.domain_file;
    a.model_ref = "model:" + train.out_path.string();
    a.config.seed = 8;
    a.config.global_trials = 1000;
    a.config.local_trials = 300;
    a.report_out = ws.dir / name;
    cmd_audit(a);
    auto j = nlohmann::json::parse(slurp(a.report_out));
    j.erase("wall_time");
    // The model path is machine-local.
    j.erase("model_ref");
    return j.dump(2);
  };
  const auto first = canonical("a.json"), second = canonical("b.json");
  const auto digest = digest_of(first);
  return {first == second && digest == kGoldenAuditDigest,
          fmt("runs %s, digest %s (golden %s)", first == second ? "identical" : "differ", digest.c_str(),
              kGoldenAuditDigest)};
}

}  // namespace

int main() {
  Workspace ws;
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"C1 zero false positives", c1_no_false_positives},
      {"C2 estimator accuracy", c2_estimator_accuracy},
      {"C3 detection-probability curve", c3_detection_curve},
      {"C4 directedness gain", [&] { return c4_directedness(ws); }},
      {"C5 strategy ordering", [&] { return c5_ordering(ws); }},
      {"C6 probability-state fuzz", c6_state_fuzz},
      {"C7 retraining guarantee", c7_retraining},
      {"C8 determinism", [&] { return c8_determinism(ws); }},
  };
  int failed = 0;
  for (const auto& [name, run] : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("%s %-32s %s (%.1fs)\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str(), secs);
    std::fflush(stdout);
    failed += !o.pass;
  }
  return failed ? 1 : 0;
}
