#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fairprobe/estimator.hpp"
#include "fairprobe/retrainer.hpp"
#include "fairprobe/search.hpp"

namespace fairprobe {

inline constexpr std::string_view kReportFormatTag = "fairprobe-report-v1";

struct AuditSummary {
  SearchConfig config;
  std::uint64_t inputs_generated = 0;
  std::uint64_t discriminatory_count = 0;
  std::uint64_t unique_discriminatory = 0;
  double percent_discriminatory = 0.0;
  PhaseTally global;
  PhaseTally local;
  PhaseTally baseline;
  std::uint64_t seeds = 0;
  StopReason stop_reason = StopReason::completed;
  std::vector<double> final_sigma_pr;  // empty for baseline runs
  std::vector<double> final_sigma_v;
  std::uint64_t findings_cap = 0;
  std::vector<Finding> findings_sample;  // first findings_cap findings
  std::vector<PointInput> discriminatory_inputs;  // every unique input, sorted

  bool operator==(const AuditSummary&) const = default;
};

struct EstimateSummary {
  DiscriminationConfig gamma;
  std::uint64_t seed = 0;
  EstimationResult result;

  bool operator==(const EstimateSummary&) const = default;
};

struct RetrainSummary {
  std::string model_kind;
  LogisticOptions logistic;
  TreeOptions tree;
  std::uint64_t est_m = 0;
  std::uint64_t est_k = 0;
  double gamma = 0.0;
  std::uint64_t seed = 0;
  std::uint64_t training_rows = 0;
  std::string findings_digest;
  std::vector<RetrainIteration> iterations;
  double initial_estimate = 0.0;
  double final_estimate = 0.0;
  std::uint64_t total_added = 0;
  double percent_added = 0.0;
  double improvement_percent = 0.0;
  RetrainExit exit = RetrainExit::schedule_exhausted;
  std::string initial_model_digest;
  std::string final_model_digest;
  std::string final_model_path;

  bool operator==(const RetrainSummary&) const = default;
};

struct CompareRow {
  Strategy strategy = Strategy::fully_directed;
  std::vector<double> percent;  // per seed
  std::vector<std::uint64_t> inputs;
  std::vector<std::uint64_t> findings;
  std::vector<double> wall_time;
  double median_percent = 0.0;
  double median_wall_time = 0.0;

  bool operator==(const CompareRow&) const = default;
};

struct CompareSummary {
  std::vector<std::uint64_t> seeds;
  std::uint64_t budget = 0;
  std::uint64_t global_trials = 0;
  double gamma = 0.0;
  double delta_v = 0.0;
  double delta_pr = 0.0;
  std::vector<CompareRow> rows;

  bool operator==(const CompareSummary&) const = default;
};

/// Machine-readable outcome of one CLI command.
struct RunReport {
  std::string command;
  std::string model_ref;
  std::string domain_digest;
  std::string model_digest;
  std::optional<AuditSummary> audit;
  std::optional<EstimateSummary> estimation;
  std::optional<RetrainSummary> retrain;
  std::optional<CompareSummary> compare;
  double wall_time = 0.0;
  /// Set when the run stopped on a model failure; the report is partial.
  std::optional<std::string> error;

  bool operator==(const RunReport&) const = default;
};

/// Fills an AuditSummary from a finished suite.
AuditSummary summarize(const SearchConfig& cfg, const TestSuite& suite, std::uint64_t findings_cap);

/// Canonical text: JSON with sorted keys, two-space indent, trailing newline.
std::string serialize_report(const RunReport& report);
/// Strict parse: unknown or missing fields and a wrong format tag throw ParseError.
RunReport parse_report(std::string_view text);

void write_report(const std::filesystem::path& path, const RunReport& report);
RunReport read_report(const std::filesystem::path& path);

}  // namespace fairprobe
