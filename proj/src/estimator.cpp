#include "fairprobe/estimator.hpp"

#include <algorithm>
#include <cmath>

#include "fairprobe/error.hpp"

namespace fairprobe {

std::vector<double> EstimationResult::running_mean() const {
  std::vector<double> out;
  out.reserve(per_trial.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < per_trial.size(); ++i) {
    sum += per_trial[i];
    out.push_back(sum / static_cast<double>(i + 1));
  }
  return out;
}

EstimationResult estimate_fraction(const Model& model, const InputDomain& domain,
                                   const DiscriminationConfig& gamma, std::uint64_t m,
                                   std::uint64_t K, Rng& rng) {
  if (m < 1) throw ContractError("estimation needs at least one sample per trial");
  if (K < 2) throw ContractError("estimation needs at least two trials for an interval");

  EstimationResult r;
  r.trials = K;
  r.samples_per_trial = m;
  r.per_trial.reserve(K);

  const std::uint64_t base = rng.next_u64();
  const Rng root(base);
  for (std::uint64_t i = 0; i < K; ++i) {
    Rng trial = root.derive(i);
    std::uint64_t hits = 0;
    for (std::uint64_t s = 0; s < m; ++s)
      if (check_discriminatory(model, sample_uniform(domain, trial), domain, gamma)) ++hits;
    r.per_trial.push_back(static_cast<double>(hits) * 100.0 / static_cast<double>(m));
  }

  double sum = 0.0;
  for (const auto v : r.per_trial) sum += v;
  r.point_estimate = sum / static_cast<double>(K);
  double ss = 0.0;
  for (const auto v : r.per_trial) ss += (v - r.point_estimate) * (v - r.point_estimate);
  const double sd = std::sqrt(ss / static_cast<double>(K - 1));
  const double half = 1.96 * sd / std::sqrt(static_cast<double>(K));
  r.ci_low = std::max(0.0, r.point_estimate - half);
  r.ci_high = std::min(100.0, r.point_estimate + half);
  return r;
}

double detection_probability(double fraction, std::uint64_t n) {
  if (!(fraction >= 0 && fraction <= 1)) throw ContractError("fraction must lie in [0, 1]");
  if (n == 0 || fraction == 0) return 0.0;
  if (fraction == 1) return 1.0;
  // 1 - exp(n * log1p(-f)) without cancellation for small f.
  return -std::expm1(static_cast<double>(n) * std::log1p(-fraction));
}

}  // namespace fairprobe
