#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "fairprobe/report.hpp"

namespace fairprobe {

/// Resolves a model reference:
///   planted:<path>   planted-bias spec file
///   external:<cmd>   adapter launch command (run through /bin/sh)
///   model:<path>     persisted native model (the prefix is optional)
ModelHandle resolve_model(const std::string& model_ref, const InputDomain& domain);

struct TrainArgs {
  std::filesystem::path domain_file;
  std::filesystem::path csv_file;
  std::string label_column = "label";
  std::string model_kind;
  LogisticOptions logistic;
  TreeOptions tree;
  std::filesystem::path out_path;
};

/// Trains a native model and writes its serialization. Returns the model.
ModelHandle cmd_train(const TrainArgs& args);

struct AuditArgs {
  std::filesystem::path domain_file;
  std::string model_ref;
  SearchConfig config;
  std::uint64_t findings_cap = 1000;
  std::filesystem::path report_out;
};

/// Runs run_audit and writes the report. A model failure yields a partial
/// report with `error` set (the caller decides the exit status).
RunReport cmd_audit(const AuditArgs& args);

struct EstimateArgs {
  std::filesystem::path domain_file;
  std::string model_ref;
  double gamma = 0.0;
  std::uint64_t m = 1000;
  std::uint64_t K = 100;
  std::uint64_t seed = 0;
  std::filesystem::path report_out;
};

RunReport cmd_estimate(const EstimateArgs& args);

struct RetrainArgs {
  std::filesystem::path domain_file;
  std::string model_kind;
  std::filesystem::path csv_file;
  std::string label_column = "label";
  std::filesystem::path findings_file;
  LogisticOptions logistic;
  TreeOptions tree;
  std::uint64_t m = 1000;
  std::uint64_t K = 100;
  double gamma = 0.0;
  std::uint64_t seed = 0;
  std::filesystem::path report_out;
};

/// Trains the starting model from the CSV, retrains it with the audit's
/// discriminatory inputs and writes the final model next to the report
/// (report path with extension ".model").
RunReport cmd_retrain(const RetrainArgs& args);

struct CompareArgs {
  std::filesystem::path domain_file;
  std::string model_ref;
  std::vector<std::uint64_t> seeds;
  std::uint64_t budget = 20000;
  /// Global-phase samples for the local-search strategies; 0 picks budget / 10.
  std::uint64_t global_trials = 0;
  double gamma = 0.0;
  double delta_v = 0.001;
  double delta_pr = 0.001;
  unsigned threads = 0;  // 0 = hardware concurrency
  std::filesystem::path report_out;
};

/// Every strategy on every seed at an equal budget of generated inputs.
RunReport cmd_compare(const CompareArgs& args);

/// Plain-text table of a compare report (one row per strategy).
std::string format_compare_table(const CompareSummary& summary);

double median(std::vector<double> values);

}  // namespace fairprobe
