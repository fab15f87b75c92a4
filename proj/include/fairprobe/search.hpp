#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "fairprobe/fairness.hpp"

namespace fairprobe {

enum class Strategy { aequitas_random, semi_directed, fully_directed, baseline_random };

std::string_view to_string(Strategy strategy);
Strategy parse_strategy(std::string_view name);
inline constexpr Strategy kAllStrategies[] = {Strategy::fully_directed, Strategy::semi_directed,
                                              Strategy::aequitas_random, Strategy::baseline_random};

struct SearchConfig {
  DiscriminationConfig discrimination;
  std::uint64_t global_trials = 1000;
  /// Iterations per seed in the local phase. When unset, an input_budget is
  /// required and the remaining budget is split evenly across the seeds.
  std::optional<std::uint64_t> local_trials = 1000;
  double delta_v = 0.001;
  double delta_pr = 0.001;
  Strategy strategy = Strategy::fully_directed;
  std::uint64_t seed = 0;

  // Termination. Whichever limit is hit first ends the run early.
  std::optional<std::uint64_t> max_findings;
  std::optional<std::chrono::duration<double>> time_budget;
  /// Maximum number of generated (model-checked) inputs.
  std::optional<std::uint64_t> input_budget;

  /// Throws UsageError describing the first invalid field.
  void validate() const;

  bool operator==(const SearchConfig&) const = default;
};

/// Parameter-choice (sigma_pr) and direction (sigma_v = P[delta = -1])
/// probabilities over the unprotected parameters.
class ProbabilityState {
 public:
  /// sigma_pr uniform over unprotected parameters, sigma_v = 0.5.
  explicit ProbabilityState(const InputDomain& domain);

  /// Unprotected parameter indices, in domain order.
  const std::vector<std::size_t>& params() const { return params_; }

  double sigma_pr(std::size_t param) const { return sigma_pr_[slot(param)]; }
  double sigma_v(std::size_t param) const { return sigma_v_[slot(param)]; }
  void set_sigma_pr(std::size_t param, double v) { sigma_pr_[slot(param)] = v; }
  void set_sigma_v(std::size_t param, double v) { sigma_v_[slot(param)] = v; }

  const std::vector<double>& sigma_pr_values() const { return sigma_pr_; }
  const std::vector<double>& sigma_v_values() const { return sigma_v_; }

  /// Draws a parameter with probability sigma_pr (one uniform draw).
  std::size_t choose_param(Rng& rng) const;
  /// -1 with probability sigma_v[param], else +1 (one uniform draw).
  int choose_delta(std::size_t param, Rng& rng) const;

  /// sigma_pr sums to 1 within `tol`, all entries non-negative, sigma_v in [0, 1].
  bool valid(double tol = 1e-9) const;

  bool operator==(const ProbabilityState&) const = default;

 private:
  std::size_t slot(std::size_t param) const;

  std::vector<std::size_t> params_;
  std::vector<std::size_t> slot_of_;  // domain index -> slot, npos for protected
  std::vector<double> sigma_pr_;
  std::vector<double> sigma_v_;
};

/// Direction update: sigma_v[p] moves toward the direction that produced a
/// discriminatory input (and away from one that did not) by delta_v, within [0, 1].
ProbabilityState update_semi(ProbabilityState state, std::size_t param, bool found, int delta,
                             const SearchConfig& cfg);

/// update_semi, then on a finding adds delta_pr to sigma_pr[p] and
/// renormalizes sigma_pr. Throws InvariantError if the sum is not positive.
ProbabilityState update_full(ProbabilityState state, std::size_t param, bool found, int delta,
                             const SearchConfig& cfg);

enum class StopReason { completed, max_findings, time_budget, input_budget };
std::string_view to_string(StopReason reason);
StopReason parse_stop_reason(std::string_view name);

struct PhaseTally {
  std::uint64_t inputs = 0;
  std::uint64_t discriminatory = 0;

  bool operator==(const PhaseTally&) const = default;
};

struct TestSuite {
  /// Every discriminatory input generated, in discovery order (duplicates kept).
  std::vector<Finding> findings;
  std::set<PointInput> unique_inputs;

  std::uint64_t inputs_generated = 0;
  PhaseTally global;
  PhaseTally local;
  PhaseTally baseline;
  /// Seeds handed from the global to the local phase.
  std::uint64_t seeds = 0;

  StopReason stop_reason = StopReason::completed;
  std::optional<ProbabilityState> final_state;
  std::chrono::duration<double> wall_time{0};

  std::uint64_t findings_count() const { return findings.size(); }
  double percent_discriminatory() const {
    return inputs_generated ? 100.0 * static_cast<double>(findings.size()) /
                                  static_cast<double>(inputs_generated)
                            : 0.0;
  }
};

/// Draws cfg.global_trials uniform inputs and checks each; returns the
/// discriminatory ones in discovery order, first occurrence of each input kept.
std::vector<Finding> global_search(const Model& model, const InputDomain& domain,
                                   const SearchConfig& cfg, Rng& rng);

/// Probabilistic walk around each seed. One ProbabilityState is shared by all
/// seeds; each step perturbs the walker cumulatively and checks it.
TestSuite local_search(const Model& model, const InputDomain& domain,
                       const std::vector<Finding>& seeds, const SearchConfig& cfg, Rng& rng);

/// Purely random comparator: `trials` uniform samples, no local phase.
TestSuite baseline_random(const Model& model, const InputDomain& domain, std::uint64_t trials,
                          Rng& rng, const DiscriminationConfig& cfg = {});

/// Global phase followed (unless the strategy is baseline_random) by the
/// local phase, under one set of termination limits.
TestSuite run_audit(const Model& model, const InputDomain& domain, const SearchConfig& cfg,
                    Rng& rng);

struct AuditOutcome {
  TestSuite suite;
  std::optional<std::string> error;  // set when a model failure cut the run short
};

/// run_audit that keeps what was generated before a TransportError or
/// ProtocolError instead of propagating it.
AuditOutcome run_audit_partial(const Model& model, const InputDomain& domain,
                               const SearchConfig& cfg, Rng& rng);

}  // namespace fairprobe
