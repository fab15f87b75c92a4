#pragma once

#include <cstdint>
#include <vector>

#include "fairprobe/fairness.hpp"

namespace fairprobe {

/// Monte Carlo estimate of the discriminatory-input percentage of a model.
struct EstimationResult {
  double point_estimate = 0.0;  // mean of per_trial, in percent
  double ci_low = 0.0;
  double ci_high = 0.0;
  std::uint64_t trials = 0;             // K
  std::uint64_t samples_per_trial = 0;  // m
  std::vector<double> per_trial;        // m'_i * 100 / m

  /// Running mean of per_trial after each trial (plot-ready convergence series).
  std::vector<double> running_mean() const;

  bool operator==(const EstimationResult&) const = default;
};

/// K independent trials of m uniform samples each. Trial i draws from
/// rng-derived substream i, so results do not depend on evaluation order.
/// The 95% interval is mean +- 1.96 s / sqrt(K) over per-trial percentages,
/// clipped to [0, 100]. Requires m >= 1 and K >= 2 (ContractError otherwise).
EstimationResult estimate_fraction(const Model& model, const InputDomain& domain,
                                   const DiscriminationConfig& gamma, std::uint64_t m,
                                   std::uint64_t K, Rng& rng);

/// 1 - (1 - fraction)^n: chance that n uniform samples hit at least one
/// discriminatory input when `fraction` of the domain is discriminatory.
double detection_probability(double fraction, std::uint64_t n);

}  // namespace fairprobe
