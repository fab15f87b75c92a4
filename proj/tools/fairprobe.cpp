// fairprobe: individual-fairness auditing of black-box classifiers.
//
// Exit status: 0 success, 1 runtime or model failure, 2 usage or configuration error.

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "fairprobe/commands.hpp"
#include "fairprobe/error.hpp"

namespace {

using namespace fairprobe;

constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

// --seed, else FAIRPROBE_SEED, else 0.
std::uint64_t resolve_seed(const std::optional<std::uint64_t>& flag) {
  if (flag) return *flag;
  if (const char* env = std::getenv("FAIRPROBE_SEED"); env && *env) {
    try {
      std::size_t used = 0;
      const auto v = std::stoull(env, &used);
      if (used == std::string(env).size()) return v;
    } catch (const std::exception&) {
    }
    throw UsageError(std::string("FAIRPROBE_SEED is not an unsigned integer: ") + env);
  }
  return 0;
}

int status_for(const Error& e) {
  if (dynamic_cast<const UsageError*>(&e) || dynamic_cast<const SchemaError*>(&e) ||
      dynamic_cast<const ParseError*>(&e) || dynamic_cast<const BoundError*>(&e) ||
      dynamic_cast<const SpecError*>(&e) || dynamic_cast<const ContractError*>(&e))
    return kExitUsage;
  return kExitFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fairprobe: directed search for discriminatory inputs of a classifier"};
  app.require_subcommand(1);

  // train
  TrainArgs train;
  auto* c_train = app.add_subcommand("train", "Train a native model from a labelled CSV");
  c_train->add_option("--domain-file", train.domain_file, "Parameter ranges and protected flags")->required();
  c_train->add_option("--csv-file", train.csv_file, "Training data")->required();
  c_train->add_option("--label-column", train.label_column, "Label column name")->capture_default_str();
  c_train->add_option("--model-kind", train.model_kind, "logistic or tree")->required();
  c_train->add_option("--epochs", train.logistic.epochs)->capture_default_str();
  c_train->add_option("--learning-rate", train.logistic.learning_rate)->capture_default_str();
  c_train->add_option("--max-depth", train.tree.max_depth)->capture_default_str();
  c_train->add_option("--min-leaf", train.tree.min_leaf)->capture_default_str();
  std::optional<std::uint64_t> train_seed;
  c_train->add_option("--seed", train_seed, "Training seed (default: $FAIRPROBE_SEED or 0)");
  c_train->add_option("--out-path", train.out_path, "Model file to write")->required();

  // audit
  AuditArgs audit;
  std::string audit_strategy = "fully_directed";
  std::optional<std::uint64_t> audit_seed, audit_local, audit_max, audit_inputs;
  std::optional<double> audit_time;
  auto* c_audit = app.add_subcommand("audit", "Search for discriminatory inputs");
  c_audit->add_option("--domain-file", audit.domain_file)->required();
  c_audit->add_option("--model-ref", audit.model_ref,
                      "Model file, planted:<spec file> or external:<launch command>")
      ->required();
  c_audit->add_option("--strategy", audit_strategy,
                      "fully_directed, semi_directed, aequitas_random or baseline_random")
      ->capture_default_str();
  c_audit->add_option("--gamma", audit.config.discrimination.gamma)->capture_default_str();
  c_audit->add_option("--delta-v", audit.config.delta_v)->capture_default_str();
  c_audit->add_option("--delta-pr", audit.config.delta_pr)->capture_default_str();
  c_audit->add_option("--global-trials", audit.config.global_trials)->capture_default_str();
  c_audit->add_option("--local-trials", audit_local, "Local iterations per seed (default 1000)");
  c_audit->add_option("--seed", audit_seed);
  c_audit->add_option("--max-findings", audit_max, "Stop after this many discriminatory inputs");
  c_audit->add_option("--time-budget", audit_time, "Stop after this many seconds");
  c_audit->add_option("--input-budget", audit_inputs, "Stop after this many generated inputs");
  c_audit->add_option("--findings-cap", audit.findings_cap, "Findings listed in the report")
      ->capture_default_str();
  c_audit->add_option("--report-out", audit.report_out)->required();

  // estimate
  EstimateArgs est;
  std::optional<std::uint64_t> est_seed;
  auto* c_est = app.add_subcommand("estimate", "Estimate the discriminatory-input percentage");
  c_est->add_option("--domain-file", est.domain_file)->required();
  c_est->add_option("--model-ref", est.model_ref)->required();
  c_est->add_option("--gamma", est.gamma)->capture_default_str();
  c_est->add_option("--m", est.m, "Samples per trial")->capture_default_str();
  c_est->add_option("--K", est.K, "Number of trials")->capture_default_str();
  c_est->add_option("--seed", est_seed);
  c_est->add_option("--report-out", est.report_out)->required();

  // retrain
  RetrainArgs re;
  std::optional<std::uint64_t> re_seed;
  auto* c_re = app.add_subcommand("retrain", "Retrain with generated discriminatory inputs");
  c_re->add_option("--domain-file", re.domain_file)->required();
  c_re->add_option("--model-kind", re.model_kind)->required();
  c_re->add_option("--csv-file", re.csv_file)->required();
  c_re->add_option("--label-column", re.label_column)->capture_default_str();
  c_re->add_option("--findings-file", re.findings_file, "Report of a prior audit")->required();
  c_re->add_option("--epochs", re.logistic.epochs)->capture_default_str();
  c_re->add_option("--learning-rate", re.logistic.learning_rate)->capture_default_str();
  c_re->add_option("--max-depth", re.tree.max_depth)->capture_default_str();
  c_re->add_option("--min-leaf", re.tree.min_leaf)->capture_default_str();
  c_re->add_option("--m", re.m)->capture_default_str();
  c_re->add_option("--K", re.K)->capture_default_str();
  c_re->add_option("--gamma", re.gamma)->capture_default_str();
  c_re->add_option("--seed", re_seed);
  c_re->add_option("--report-out", re.report_out)->required();

  // compare
  CompareArgs cmp;
  auto* c_cmp = app.add_subcommand("compare", "Compare all strategies at an equal input budget");
  c_cmp->add_option("--domain-file", cmp.domain_file)->required();
  c_cmp->add_option("--model-ref", cmp.model_ref)->required();
  c_cmp->add_option("--seeds", cmp.seeds, "Seeds (space or comma separated)")->delimiter(',');
  c_cmp->add_option("--budget", cmp.budget, "Generated inputs per strategy and seed")->capture_default_str();
  c_cmp->add_option("--global-trials", cmp.global_trials, "Global samples (0: budget/10)")
      ->capture_default_str();
  c_cmp->add_option("--gamma", cmp.gamma)->capture_default_str();
  c_cmp->add_option("--delta-v", cmp.delta_v)->capture_default_str();
  c_cmp->add_option("--delta-pr", cmp.delta_pr)->capture_default_str();
  c_cmp->add_option("--threads", cmp.threads)->capture_default_str();
  c_cmp->add_option("--report-out", cmp.report_out)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*c_train) {
      train.logistic.seed = train.tree.seed = resolve_seed(train_seed);
      cmd_train(train);
      std::cout << "wrote " << train.out_path.string() << "\n";
    } else if (*c_audit) {
      audit.config.strategy = parse_strategy(audit_strategy);
      audit.config.seed = resolve_seed(audit_seed);
      if (audit_local) audit.config.local_trials = *audit_local;
      audit.config.max_findings = audit_max;
      audit.config.input_budget = audit_inputs;
      if (audit_time) audit.config.time_budget = std::chrono::duration<double>(*audit_time);
      const auto report = cmd_audit(audit);
      const auto& a = *report.audit;
      std::cout << "inputs generated: " << a.inputs_generated
                << "\ndiscriminatory:   " << a.discriminatory_count << " (" << a.percent_discriminatory
                << "%), unique " << a.unique_discriminatory << "\nstop reason:      "
                << to_string(a.stop_reason) << "\n";
      if (report.error) {
        std::cerr << "fairprobe: model failure, partial report written: " << *report.error << "\n";
        return kExitFailure;
      }
    } else if (*c_est) {
      est.seed = resolve_seed(est_seed);
      const auto report = cmd_estimate(est);
      const auto& r = report.estimation->result;
      std::cout << "estimated discriminatory inputs: " << r.point_estimate << "% (95% CI " << r.ci_low
                << " .. " << r.ci_high << ")\n";
    } else if (*c_re) {
      re.seed = resolve_seed(re_seed);
      const auto report = cmd_retrain(re);
      const auto& r = *report.retrain;
      std::cout << "estimate " << r.initial_estimate << "% -> " << r.final_estimate << "% ("
                << r.improvement_percent << "% improvement, " << r.percent_added
                << "% rows added)\nmodel written to " << r.final_model_path << "\n";
    } else if (*c_cmp) {
      if (cmp.seeds.empty()) cmp.seeds.push_back(resolve_seed(std::nullopt));
      const auto report = cmd_compare(cmp);
      std::cout << format_compare_table(*report.compare);
    }
  } catch (const Error& e) {
    std::cerr << "fairprobe: " << e.what() << "\n";
    return status_for(e);
  } catch (const std::exception& e) {
    std::cerr << "fairprobe: " << e.what() << "\n";
    return kExitFailure;
  }
  return 0;
}
