#include "fairprobe/fairness.hpp"

#include <cmath>
#include <cstdlib>

#include "fairprobe/error.hpp"

namespace fairprobe {

std::string_view to_string(Origin origin) {
  switch (origin) {
    case Origin::global: return "global";
    case Origin::local: return "local";
    case Origin::baseline: return "baseline";
  }
  return "unknown";
}

Origin parse_origin(std::string_view name) {
  if (name == "global") return Origin::global;
  if (name == "local") return Origin::local;
  if (name == "baseline") return Origin::baseline;
  throw ParseError("unknown finding origin '" + std::string(name) + "'");
}

namespace {

bool exceeds(Label a, Label b, double gamma) {
  return std::abs(static_cast<double>(a) - static_cast<double>(b)) > gamma;
}

}  // namespace

std::optional<Finding> check_discriminatory(const Model& model, const PointInput& input,
                                            const InputDomain& domain,
                                            const DiscriminationConfig& cfg, Origin origin,
                                            std::uint64_t step) {
  if (!(cfg.gamma >= 0)) throw ContractError("gamma must be non-negative");
  domain.require_contains(input);

  const auto variants = protected_variants(input, domain);
  const auto labels = model.predict_batch(variants);
  const auto self = variant_position(input, domain);
  const Label own = labels[self];
  for (std::size_t i = 0; i < variants.size(); ++i) {
    if (i == self || !exceeds(own, labels[i], cfg.gamma)) continue;
    return Finding{input, variants[i], own, labels[i], origin, step};
  }
  return std::nullopt;
}

PointInput perturb(const PointInput& input, std::size_t param_index, int delta,
                   const InputDomain& domain) {
  if (param_index >= domain.size()) throw ContractError("parameter index out of range");
  const auto& p = domain.param(param_index);
  if (p.is_protected) throw ContractError("cannot perturb protected parameter '" + p.name + "'");
  if (delta != -1 && delta != 1) throw ContractError("perturbation delta must be -1 or +1");

  PointInput out = input;
  const Value moved = out[param_index] + delta;
  out[param_index] = moved < p.min_value ? p.min_value : moved > p.max_value ? p.max_value : moved;
  return out;
}

bool reverify(const Model& model, const Finding& finding, const InputDomain& domain,
              const DiscriminationConfig& cfg) {
  if (!domain.contains(finding.input) || !domain.contains(finding.witness)) return false;
  bool differs = false;
  for (std::size_t i = 0; i < domain.size(); ++i) {
    const bool same = finding.input[i] == finding.witness[i];
    if (domain.param(i).is_protected)
      differs = differs || !same;
    else if (!same)
      return false;
  }
  if (!differs) return false;
  const PointInput pair[] = {finding.input, finding.witness};
  const auto labels = model.predict_batch(pair);
  return labels[0] == finding.label_input && labels[1] == finding.label_witness &&
         exceeds(labels[0], labels[1], cfg.gamma);
}

}  // namespace fairprobe
