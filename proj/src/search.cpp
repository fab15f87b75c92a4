#include "fairprobe/search.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "fairprobe/error.hpp"

namespace fairprobe {

std::string_view to_string(Strategy strategy) {
  switch (strategy) {
    case Strategy::aequitas_random: return "aequitas_random";
    case Strategy::semi_directed: return "semi_directed";
    case Strategy::fully_directed: return "fully_directed";
    case Strategy::baseline_random: return "baseline_random";
  }
  return "unknown";
}

Strategy parse_strategy(std::string_view name) {
  for (const auto s : kAllStrategies)
    if (to_string(s) == name) return s;
  throw UsageError("unknown strategy '" + std::string(name) +
                   "' (expected fully_directed, semi_directed, aequitas_random or baseline_random)");
}

std::string_view to_string(StopReason reason) {
  switch (reason) {
    case StopReason::completed: return "completed";
    case StopReason::max_findings: return "max_findings";
    case StopReason::time_budget: return "time_budget";
    case StopReason::input_budget: return "input_budget";
  }
  return "unknown";
}

StopReason parse_stop_reason(std::string_view name) {
  for (const auto r : {StopReason::completed, StopReason::max_findings, StopReason::time_budget,
                       StopReason::input_budget})
    if (to_string(r) == name) return r;
  throw ParseError("unknown stop reason '" + std::string(name) + "'");
}

void SearchConfig::validate() const {
  if (!(discrimination.gamma >= 0)) throw UsageError("gamma must be non-negative");
  if (!(delta_v > 0 && delta_v < 1)) throw UsageError("delta_v must lie in (0, 1)");
  if (!(delta_pr > 0) || !std::isfinite(delta_pr)) throw UsageError("delta_pr must be positive");
  if (!local_trials && !input_budget)
    throw UsageError("local_trials may only be derived when an input budget is set");
  if (time_budget && !(time_budget->count() >= 0)) throw UsageError("time budget must be non-negative");
}

// ---------------------------------------------------------------------------

ProbabilityState::ProbabilityState(const InputDomain& domain)
    : params_(domain.unprotected_indices()),
      slot_of_(domain.size(), std::numeric_limits<std::size_t>::max()),
      sigma_pr_(params_.size(), 1.0 / static_cast<double>(params_.size())),
      sigma_v_(params_.size(), 0.5) {
  for (std::size_t s = 0; s < params_.size(); ++s) slot_of_[params_[s]] = s;
}

std::size_t ProbabilityState::slot(std::size_t param) const {
  if (param >= slot_of_.size() || slot_of_[param] == std::numeric_limits<std::size_t>::max())
    throw ContractError("parameter " + std::to_string(param) + " is not perturbable");
  return slot_of_[param];
}

std::size_t ProbabilityState::choose_param(Rng& rng) const {
  const double u = rng.uniform01();
  double acc = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t s = 0; s < sigma_pr_.size(); ++s) {
    if (sigma_pr_[s] <= 0) continue;
    last_positive = s;
    acc += sigma_pr_[s];
    if (u < acc) return params_[s];
  }
  // u landed in the rounding slack above the cumulative sum.
  return params_[last_positive];
}

int ProbabilityState::choose_delta(std::size_t param, Rng& rng) const {
  return rng.bernoulli(sigma_v(param)) ? -1 : 1;
}

bool ProbabilityState::valid(double tol) const {
  double sum = 0.0;
  for (const auto p : sigma_pr_) {
    if (!(p >= 0) || !std::isfinite(p)) return false;
    sum += p;
  }
  if (std::abs(sum - 1.0) > tol) return false;
  return std::all_of(sigma_v_.begin(), sigma_v_.end(), [](double v) { return v >= 0 && v <= 1; });
}

ProbabilityState update_semi(ProbabilityState state, std::size_t param, bool found, int delta,
                             const SearchConfig& cfg) {
  if (delta != -1 && delta != 1) throw ContractError("delta must be -1 or +1");
  const bool toward_minus = (found && delta == -1) || (!found && delta == 1);
  const double v = state.sigma_v(param);
  state.set_sigma_v(param, toward_minus ? std::min(v + cfg.delta_v, 1.0)
                                        : std::max(v - cfg.delta_v, 0.0));
  return state;
}

ProbabilityState update_full(ProbabilityState state, std::size_t param, bool found, int delta,
                             const SearchConfig& cfg) {
  state = update_semi(std::move(state), param, found, delta, cfg);
  if (!found) return state;
  state.set_sigma_pr(param, state.sigma_pr(param) + cfg.delta_pr);
  double total = 0.0;
  for (const auto p : state.sigma_pr_values()) total += p;
  if (!(total > 0) || !std::isfinite(total))
    throw InvariantError("sigma_pr normalization over a non-positive total");
  for (const auto p : state.params()) state.set_sigma_pr(p, state.sigma_pr(p) / total);
  return state;
}

// ---------------------------------------------------------------------------

namespace {

using Clock = std::chrono::steady_clock;

// Shared bookkeeping for one run: termination limits and the suite under construction.
class Run {
 public:
  Run(const Model& model, const InputDomain& domain, const SearchConfig& cfg)
      : model_(model), domain_(domain), cfg_(cfg), start_(Clock::now()) {}

  // Checked once per model evaluation.
  bool should_stop() {
    if (stopped_) return true;
    if (cfg_.max_findings && suite.findings.size() >= *cfg_.max_findings)
      return stop(StopReason::max_findings);
    if (cfg_.input_budget && suite.inputs_generated >= *cfg_.input_budget)
      return stop(StopReason::input_budget);
    if (cfg_.time_budget && Clock::now() - start_ >= *cfg_.time_budget)
      return stop(StopReason::time_budget);
    return false;
  }

  // Evaluates one generated input and records it. Returns the finding, if any.
  std::optional<Finding> evaluate(const PointInput& input, Origin origin, PhaseTally& tally) {
    const auto step = suite.inputs_generated;
    auto finding = check_discriminatory(model_, input, domain_, cfg_.discrimination, origin, step);
    ++suite.inputs_generated;
    ++tally.inputs;
    if (finding) {
      ++tally.discriminatory;
      suite.unique_inputs.insert(finding->input);
      suite.findings.push_back(*finding);
    }
    return finding;
  }

  TestSuite finish() {
    suite.wall_time = Clock::now() - start_;
    return std::move(suite);
  }

  TestSuite suite;

 private:
  bool stop(StopReason reason) {
    stopped_ = true;
    suite.stop_reason = reason;
    return true;
  }

  const Model& model_;
  const InputDomain& domain_;
  const SearchConfig& cfg_;
  Clock::time_point start_;
  bool stopped_ = false;
};

std::vector<Finding> global_phase(Run& run, const InputDomain& domain, const SearchConfig& cfg,
                                  Rng& rng) {
  std::vector<Finding> seeds;
  std::set<PointInput> seen;
  for (std::uint64_t i = 0; i < cfg.global_trials; ++i) {
    if (run.should_stop()) break;
    const auto input = sample_uniform(domain, rng);
    if (auto f = run.evaluate(input, Origin::global, run.suite.global); f && seen.insert(f->input).second)
      seeds.push_back(std::move(*f));
  }
  return seeds;
}

void local_phase(Run& run, const InputDomain& domain, const std::vector<Finding>& seeds,
                 const SearchConfig& cfg, Rng& rng) {
  ProbabilityState state(domain);
  run.suite.seeds = seeds.size();

  std::uint64_t per_seed = 0;
  if (cfg.local_trials) {
    per_seed = *cfg.local_trials;
  } else if (!seeds.empty()) {
    const auto used = run.suite.inputs_generated;
    const auto left = *cfg.input_budget > used ? *cfg.input_budget - used : 0;
    per_seed = (left + seeds.size() - 1) / seeds.size();
  }

  for (const auto& seed : seeds) {
    PointInput walker = seed.input;
    for (std::uint64_t i = 0; i < per_seed; ++i) {
      if (run.should_stop()) {
        run.suite.final_state = std::move(state);
        return;
      }
      const auto p = state.choose_param(rng);
      const int delta = state.choose_delta(p, rng);
      walker = perturb(walker, p, delta, domain);
      const bool found = run.evaluate(walker, Origin::local, run.suite.local).has_value();
      switch (cfg.strategy) {
        case Strategy::semi_directed:
          state = update_semi(std::move(state), p, found, delta, cfg);
          break;
        case Strategy::fully_directed:
          state = update_full(std::move(state), p, found, delta, cfg);
          break;
        case Strategy::aequitas_random:
        case Strategy::baseline_random:
          break;
      }
    }
  }
  run.should_stop();  // records a limit reached on the very last step
  run.suite.final_state = std::move(state);
}

}  // namespace

std::vector<Finding> global_search(const Model& model, const InputDomain& domain,
                                   const SearchConfig& cfg, Rng& rng) {
  cfg.validate();
  Run run(model, domain, cfg);
  return global_phase(run, domain, cfg, rng);
}

TestSuite local_search(const Model& model, const InputDomain& domain,
                       const std::vector<Finding>& seeds, const SearchConfig& cfg, Rng& rng) {
  cfg.validate();
  Run run(model, domain, cfg);
  local_phase(run, domain, seeds, cfg, rng);
  return run.finish();
}

TestSuite baseline_random(const Model& model, const InputDomain& domain, std::uint64_t trials,
                          Rng& rng, const DiscriminationConfig& cfg) {
  SearchConfig sc;
  sc.discrimination = cfg;
  sc.strategy = Strategy::baseline_random;
  Run run(model, domain, sc);
  for (std::uint64_t i = 0; i < trials; ++i)
    run.evaluate(sample_uniform(domain, rng), Origin::baseline, run.suite.baseline);
  return run.finish();
}

namespace {

void audit_phases(Run& run, const InputDomain& domain, const SearchConfig& cfg, Rng& rng) {
  if (cfg.strategy == Strategy::baseline_random) {
    for (std::uint64_t i = 0; i < cfg.global_trials; ++i) {
      if (run.should_stop()) break;
      run.evaluate(sample_uniform(domain, rng), Origin::baseline, run.suite.baseline);
    }
    run.should_stop();
    return;
  }
  const auto seeds = global_phase(run, domain, cfg, rng);
  local_phase(run, domain, seeds, cfg, rng);
}

}  // namespace

TestSuite run_audit(const Model& model, const InputDomain& domain, const SearchConfig& cfg,
                    Rng& rng) {
  cfg.validate();
  Run run(model, domain, cfg);
  audit_phases(run, domain, cfg, rng);
  return run.finish();
}

AuditOutcome run_audit_partial(const Model& model, const InputDomain& domain,
                               const SearchConfig& cfg, Rng& rng) {
  cfg.validate();
  Run run(model, domain, cfg);
  std::optional<std::string> error;
  try {
    audit_phases(run, domain, cfg, rng);
  } catch (const TransportError& e) {
    error = std::string("transport: ") + e.what();
  } catch (const ProtocolError& e) {
    error = std::string("protocol: ") + e.what();
  }
  return {run.finish(), std::move(error)};
}

}  // namespace fairprobe
