#include "fairprobe/retrainer.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "fairprobe/error.hpp"

namespace fairprobe {

std::string_view to_string(RetrainExit exit) {
  return exit == RetrainExit::schedule_exhausted ? "schedule_exhausted" : "no_improvement";
}

RetrainExit parse_retrain_exit(std::string_view name) {
  if (name == "schedule_exhausted") return RetrainExit::schedule_exhausted;
  if (name == "no_improvement") return RetrainExit::no_improvement;
  throw ParseError("unknown retrain exit '" + std::string(name) + "'");
}

std::size_t RetrainReport::accepted_count() const {
  return static_cast<std::size_t>(
      std::count_if(iterations.begin(), iterations.end(), [](const auto& it) { return it.accepted; }));
}

Label label_generated(const PointInput& input, const Model& model, const InputDomain& domain) {
  const auto labels = model.predict_batch(protected_variants(input, domain));
  std::map<Label, std::size_t> votes;
  for (const auto l : labels) ++votes[l];
  std::size_t top = 0;
  for (const auto& [label, n] : votes) top = std::max(top, n);
  for (const auto l : labels)
    if (votes[l] == top) return l;
  return labels.front();
}

RetrainReport retrain_loop(const Trainer& trainer, const InputDomain& domain,
                           const LabeledDataset& training_data,
                           const std::vector<PointInput>& discriminatory,
                           const EstimationParams& est, Rng& rng, ModelHandle initial_model) {
  if (discriminatory.empty())
    throw ContractError("retraining needs at least one discriminatory input; run an audit first");
  if (training_data.empty()) throw ContractError("retraining needs nonempty training data");

  // Substream 0 estimates the starting model; substream i the model of round i.
  const Rng streams(rng.next_u64());
  auto estimate = [&](const Model& model, std::uint64_t stream) {
    Rng sub = streams.derive(stream);
    return estimate_fraction(model, domain, est.gamma, est.m, est.K, sub).point_estimate;
  };

  RetrainReport report;
  ModelHandle current = initial_model ? std::move(initial_model) : trainer(training_data);
  double current_estimate = estimate(*current, 0);
  report.initial_estimate = current_estimate;

  const auto k = training_data.size();
  for (int i = 2;; ++i) {
    const double p = rng.uniform_open(std::ldexp(1.0, i - 2), std::ldexp(1.0, i - 1));
    if (p > 100) {
      report.exit = RetrainExit::schedule_exhausted;
      break;
    }
    const auto n_add = static_cast<std::uint64_t>(std::floor(p * static_cast<double>(k) / 100.0));

    // Without replacement while the pool lasts, then with replacement.
    std::vector<std::size_t> pool(discriminatory.size());
    std::iota(pool.begin(), pool.end(), std::size_t{0});
    LabeledDataset augmented = training_data;
    augmented.rows.reserve(k + n_add);
    for (std::uint64_t j = 0; j < n_add; ++j) {
      std::size_t pick;
      if (j < pool.size()) {
        const auto r = static_cast<std::size_t>(
            rng.uniform_int(static_cast<std::int64_t>(j), static_cast<std::int64_t>(pool.size() - 1)));
        std::swap(pool[j], pool[r]);
        pick = pool[j];
      } else {
        pick = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(pool.size() - 1)));
      }
      const auto& input = discriminatory[pick];
      augmented.rows.push_back({input, label_generated(input, *current, domain)});
    }

    auto candidate = trainer(augmented);
    const double candidate_estimate = estimate(*candidate, static_cast<std::uint64_t>(i));
    RetrainIteration it{i, p, n_add, current_estimate, candidate_estimate, false};
    if (current_estimate > candidate_estimate) {
      it.accepted = true;
      current = std::move(candidate);
      current_estimate = candidate_estimate;
      report.total_added = n_add;
    }
    report.iterations.push_back(it);
    if (!it.accepted) {
      report.exit = RetrainExit::no_improvement;
      break;
    }
  }

  report.final_model = std::move(current);
  report.final_estimate = current_estimate;
  report.percent_added = 100.0 * static_cast<double>(report.total_added) / static_cast<double>(k);
  report.improvement_percent =
      report.initial_estimate > 0
          ? 100.0 * (report.initial_estimate - report.final_estimate) / report.initial_estimate
          : 0.0;
  return report;
}

RetrainReport retrain_loop(const Trainer& trainer, const InputDomain& domain,
                           const LabeledDataset& training_data, const TestSuite& suite,
                           const EstimationParams& est, Rng& rng, ModelHandle initial_model) {
  const std::vector<PointInput> inputs(suite.unique_inputs.begin(), suite.unique_inputs.end());
  return retrain_loop(trainer, domain, training_data, inputs, est, rng, std::move(initial_model));
}

}  // namespace fairprobe
