#pragma once

#include <cstdint>
#include <functional>
#include <string_view>
#include <vector>

#include "fairprobe/estimator.hpp"
#include "fairprobe/search.hpp"

namespace fairprobe {

/// Deterministic training procedure (e.g. a bound train_tree call).
using Trainer = std::function<ModelHandle(const LabeledDataset&)>;

struct EstimationParams {
  std::uint64_t m = 1000;
  std::uint64_t K = 100;
  DiscriminationConfig gamma;
};

enum class RetrainExit { schedule_exhausted, no_improvement };
std::string_view to_string(RetrainExit exit);
RetrainExit parse_retrain_exit(std::string_view name);

struct RetrainIteration {
  int i = 0;
  double p_i = 0.0;             // percentage of the training size added
  std::uint64_t rows_added = 0;
  double estimate_before = 0.0;  // current model, percent
  double estimate_after = 0.0;   // retrained model, percent
  bool accepted = false;

  bool operator==(const RetrainIteration&) const = default;
};

struct RetrainReport {
  std::vector<RetrainIteration> iterations;  // attempted rounds (the last may be rejected)
  ModelHandle final_model;
  double initial_estimate = 0.0;
  double final_estimate = 0.0;
  std::uint64_t total_added = 0;  // rows added to the training data of final_model
  double percent_added = 0.0;     // total_added vs the original training size
  double improvement_percent = 0.0;
  RetrainExit exit = RetrainExit::schedule_exhausted;

  std::size_t accepted_count() const;
};

/// Majority label of `model` over the protected variants of `input`. Ties go
/// to the tied label seen first in variant order (lowest protected values first).
Label label_generated(const PointInput& input, const Model& model, const InputDomain& domain);

/// Iteration i = 2, 3, ... draws p_i uniformly in (2^(i-2), 2^(i-1)) and stops
/// once p_i > 100. Otherwise floor(p_i * |training| / 100) discriminatory
/// inputs (without replacement while possible) are self-labelled by the
/// current model and appended to the original training data; the retrained
/// model replaces the current one only when its estimated discrimination is
/// strictly lower. Each model is estimated once, when first trained, so the
/// accepted estimates form a strictly decreasing sequence.
///
/// `initial_model` defaults to trainer(training_data). Throws ContractError
/// when `discriminatory` is empty.
RetrainReport retrain_loop(const Trainer& trainer, const InputDomain& domain,
                           const LabeledDataset& training_data,
                           const std::vector<PointInput>& discriminatory,
                           const EstimationParams& est, Rng& rng,
                           ModelHandle initial_model = nullptr);

RetrainReport retrain_loop(const Trainer& trainer, const InputDomain& domain,
                           const LabeledDataset& training_data, const TestSuite& suite,
                           const EstimationParams& est, Rng& rng,
                           ModelHandle initial_model = nullptr);

}  // namespace fairprobe
