#include "fairprobe/commands.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <mutex>
#include <thread>

#include "fairprobe/digest.hpp"
#include "fairprobe/error.hpp"
#include "fairprobe/external_model.hpp"

namespace fairprobe {
namespace {

using Clock = std::chrono::steady_clock;

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SchemaError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

Trainer make_trainer(const std::string& kind, const InputDomain& domain, const LogisticOptions& logistic,
                     const TreeOptions& tree) {
  switch (parse_model_kind(kind)) {
    case ModelKind::logistic:
      return [&domain, logistic](const LabeledDataset& d) -> ModelHandle {
        return train_logistic(domain, d, logistic);
      };
    case ModelKind::tree:
      return [&domain, tree](const LabeledDataset& d) -> ModelHandle { return train_tree(domain, d, tree); };
    case ModelKind::planted:
    case ModelKind::external:
      break;
  }
  throw UsageError("model kind '" + kind + "' is not trainable (use logistic or tree)");
}

RunReport base_report(std::string command, const std::string& model_ref, const InputDomain& domain,
                      const Model& model) {
  RunReport r;
  r.command = std::move(command);
  r.model_ref = model_ref;
  r.domain_digest = domain.digest();
  r.model_digest = model.digest();
  return r;
}

}  // namespace

double median(std::vector<double> values) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  const auto n = values.size();
  return n % 2 ? values[n / 2] : (values[n / 2 - 1] + values[n / 2]) / 2.0;
}

ModelHandle resolve_model(const std::string& model_ref, const InputDomain& domain) {
  if (model_ref.starts_with("planted:"))
    return make_planted(domain, parse_planted_spec(read_file(model_ref.substr(8)), domain));
  if (model_ref.starts_with("external:")) return connect_external(model_ref.substr(9), domain);
  if (model_ref.starts_with("model:")) return load_model(model_ref.substr(6), domain);
  if (model_ref.empty()) throw UsageError("model reference is empty");
  return load_model(model_ref, domain);
}

ModelHandle cmd_train(const TrainArgs& args) {
  const auto domain = load_domain(args.domain_file);
  const auto trainer = make_trainer(args.model_kind, domain, args.logistic, args.tree);
  const auto data = load_csv(args.csv_file, domain, args.label_column);
  auto model = trainer(data);
  save_model(args.out_path, *model);
  return model;
}

RunReport cmd_audit(const AuditArgs& args) {
  const auto start = Clock::now();
  const auto domain = load_domain(args.domain_file);
  args.config.validate();
  const auto model = resolve_model(args.model_ref, domain);

  Rng rng(args.config.seed);
  auto outcome = run_audit_partial(*model, domain, args.config, rng);

  auto report = base_report("audit", args.model_ref, domain, *model);
  report.audit = summarize(args.config, outcome.suite, args.findings_cap);
  report.error = std::move(outcome.error);
  report.wall_time = seconds_since(start);
  if (!args.report_out.empty()) write_report(args.report_out, report);
  return report;
}

RunReport cmd_estimate(const EstimateArgs& args) {
  const auto start = Clock::now();
  if (args.K < 2) throw UsageError("K must be at least 2 (the interval needs two trials)");
  if (args.m < 1) throw UsageError("m must be at least 1");
  if (!(args.gamma >= 0)) throw UsageError("gamma must be non-negative");
  const auto domain = load_domain(args.domain_file);
  const auto model = resolve_model(args.model_ref, domain);

  Rng rng(args.seed);
  const DiscriminationConfig gamma{args.gamma};
  auto report = base_report("estimate", args.model_ref, domain, *model);
  report.estimation = EstimateSummary{gamma, args.seed,
                                      estimate_fraction(*model, domain, gamma, args.m, args.K, rng)};
  report.wall_time = seconds_since(start);
  if (!args.report_out.empty()) write_report(args.report_out, report);
  return report;
}

RunReport cmd_retrain(const RetrainArgs& args) {
  const auto start = Clock::now();
  if (args.K < 2) throw UsageError("K must be at least 2");
  if (args.m < 1) throw UsageError("m must be at least 1");
  const auto domain = load_domain(args.domain_file);

  const auto findings_text = read_file(args.findings_file);
  const auto findings = parse_report(findings_text);
  if (findings.domain_digest != domain.digest())
    throw SchemaError("findings file was produced for domain " + findings.domain_digest +
                      ", this domain is " + domain.digest());
  if (!findings.audit || findings.audit->discriminatory_inputs.empty())
    throw ContractError("findings file holds no discriminatory inputs; run `fairprobe audit` on the "
                        "model first and pass its report as --findings-file");

  LogisticOptions logistic = args.logistic;
  TreeOptions tree = args.tree;
  logistic.seed = tree.seed = args.seed;
  const auto trainer = make_trainer(args.model_kind, domain, logistic, tree);
  const auto data = load_csv(args.csv_file, domain, args.label_column);

  Rng rng(args.seed);
  const EstimationParams est{args.m, args.K, DiscriminationConfig{args.gamma}};
  const auto initial = trainer(data);
  const auto result =
      retrain_loop(trainer, domain, data, findings.audit->discriminatory_inputs, est, rng, initial);

  auto model_path = args.report_out.empty() ? std::filesystem::path("retrained.model") : args.report_out;
  model_path.replace_extension(".model");
  save_model(model_path, *result.final_model);

  auto report = base_report("retrain", "model:" + model_path.string(), domain, *result.final_model);
  RetrainSummary s;
  s.model_kind = args.model_kind;
  s.logistic = logistic;
  s.tree = tree;
  s.est_m = args.m;
  s.est_k = args.K;
  s.gamma = args.gamma;
  s.seed = args.seed;
  s.training_rows = data.size();
  s.findings_digest = digest_of(findings_text);
  s.iterations = result.iterations;
  s.initial_estimate = result.initial_estimate;
  s.final_estimate = result.final_estimate;
  s.total_added = result.total_added;
  s.percent_added = result.percent_added;
  s.improvement_percent = result.improvement_percent;
  s.exit = result.exit;
  s.initial_model_digest = initial->digest();
  s.final_model_digest = result.final_model->digest();
  s.final_model_path = model_path.string();
  report.retrain = std::move(s);
  report.wall_time = seconds_since(start);
  if (!args.report_out.empty()) write_report(args.report_out, report);
  return report;
}

RunReport cmd_compare(const CompareArgs& args) {
  const auto start = Clock::now();
  if (args.seeds.empty()) throw UsageError("compare needs at least one seed");
  if (args.budget == 0) throw UsageError("budget must be positive");
  const auto domain = load_domain(args.domain_file);
  const auto model = resolve_model(args.model_ref, domain);
  const std::uint64_t global = args.global_trials ? args.global_trials : std::max<std::uint64_t>(1, args.budget / 10);

  struct Cell {
    Strategy strategy;
    std::uint64_t seed;
    TestSuite suite;
  };
  std::vector<Cell> cells;
  for (const auto s : kAllStrategies)
    for (const auto seed : args.seeds) cells.push_back({s, seed, {}});

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < cells.size();) {
      auto& cell = cells[i];
      SearchConfig cfg;
      cfg.discrimination.gamma = args.gamma;
      cfg.delta_v = args.delta_v;
      cfg.delta_pr = args.delta_pr;
      cfg.strategy = cell.strategy;
      cfg.seed = cell.seed;
      cfg.input_budget = args.budget;
      cfg.global_trials = cell.strategy == Strategy::baseline_random ? args.budget : std::min(global, args.budget);
      cfg.local_trials.reset();
      try {
        Rng rng(cell.seed);
        cell.suite = run_audit(*model, domain, cfg, rng);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  unsigned threads = args.threads ? args.threads : std::max(1u, std::thread::hardware_concurrency());
  if (model->kind() == ModelKind::external) threads = 1;
  threads = std::min<unsigned>(threads, static_cast<unsigned>(cells.size()));
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);

  CompareSummary summary;
  summary.seeds = args.seeds;
  summary.budget = args.budget;
  summary.global_trials = global;
  summary.gamma = args.gamma;
  summary.delta_v = args.delta_v;
  summary.delta_pr = args.delta_pr;
  for (const auto s : kAllStrategies) {
    CompareRow row;
    row.strategy = s;
    for (const auto& cell : cells) {
      if (cell.strategy != s) continue;
      row.percent.push_back(cell.suite.percent_discriminatory());
      row.inputs.push_back(cell.suite.inputs_generated);
      row.findings.push_back(cell.suite.findings.size());
      row.wall_time.push_back(cell.suite.wall_time.count());
    }
    row.median_percent = median(row.percent);
    row.median_wall_time = median(row.wall_time);
    summary.rows.push_back(std::move(row));
  }

  auto report = base_report("compare", args.model_ref, domain, *model);
  report.compare = std::move(summary);
  report.wall_time = seconds_since(start);
  if (!args.report_out.empty()) write_report(args.report_out, report);
  return report;
}

std::string format_compare_table(const CompareSummary& summary) {
  std::string out;
  char line[160];
  std::snprintf(line, sizeof line, "%-18s %14s %16s %10s\n", "strategy", "% discrim.", "median inputs",
                "time (s)");
  out += line;
  for (const auto& row : summary.rows) {
    std::vector<double> inputs(row.inputs.begin(), row.inputs.end());
    std::snprintf(line, sizeof line, "%-18s %14.3f %16.0f %10.3f\n", std::string(to_string(row.strategy)).c_str(),
                  row.median_percent, median(inputs), row.median_wall_time);
    out += line;
  }
  return out;
}

}  // namespace fairprobe
