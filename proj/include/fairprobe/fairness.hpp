#pragma once

#include <cstdint>
#include <optional>
#include <string_view>

#include "fairprobe/domain.hpp"
#include "fairprobe/models.hpp"

namespace fairprobe {

struct DiscriminationConfig {
  /// Inputs are discriminatory when some protected variant's label differs
  /// by strictly more than gamma.
  double gamma = 0.0;

  bool operator==(const DiscriminationConfig&) const = default;
};

enum class Origin { global, local, baseline };

std::string_view to_string(Origin origin);
Origin parse_origin(std::string_view name);

/// A verified discriminatory input together with the variant that exposes it.
struct Finding {
  PointInput input;
  PointInput witness;
  Label label_input = 0;
  Label label_witness = 0;
  Origin origin = Origin::global;
  std::uint64_t step = 0;

  bool operator==(const Finding&) const = default;
};

/// Evaluates `model` on every protected variant of `input` (one batch call,
/// exactly variant_count() evaluations) and returns a Finding for the first
/// variant, in enumeration order, whose label differs from the input's label
/// by more than cfg.gamma. Throws ContractError for a negative gamma and
/// BoundError for an input outside the domain.
std::optional<Finding> check_discriminatory(const Model& model, const PointInput& input,
                                            const InputDomain& domain,
                                            const DiscriminationConfig& cfg,
                                            Origin origin = Origin::global, std::uint64_t step = 0);

/// Changes parameter `param_index` by `delta` (-1 or +1), clamped to the
/// parameter's range. Throws ContractError for a protected parameter or a
/// delta outside {-1, +1}.
PointInput perturb(const PointInput& input, std::size_t param_index, int delta,
                   const InputDomain& domain);

/// Re-evaluates the model on the finding's pair and checks the label gap and
/// the pair's structure (same unprotected projection, different protected values).
bool reverify(const Model& model, const Finding& finding, const InputDomain& domain,
              const DiscriminationConfig& cfg);

}  // namespace fairprobe
