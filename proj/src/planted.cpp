#include <charconv>

#include "fairprobe/digest.hpp"
#include "fairprobe/error.hpp"
#include "fairprobe/models.hpp"

namespace fairprobe {

PlantedModel::PlantedModel(InputDomain domain, PlantedBiasSpec spec)
    : domain_(std::move(domain)), spec_(std::move(spec)) {
  if (spec_.biased_param >= domain_.size() || !domain_.param(spec_.biased_param).is_protected)
    throw SpecError("planted spec: biased parameter must be a protected parameter");
  const auto& bp = domain_.param(spec_.biased_param);
  if (!bp.contains(spec_.biased_value))
    throw SpecError("planted spec: biased value " + std::to_string(spec_.biased_value) +
                    " outside range of '" + bp.name + "'");
  if (bp.range_size() < 2)
    throw SpecError("planted spec: biased parameter '" + bp.name + "' has a single value");

  for (const auto& [index, interval] : spec_.region) {
    if (index >= domain_.size()) throw SpecError("planted spec: region parameter out of range");
    const auto& p = domain_.param(index);
    if (p.is_protected)
      throw SpecError("planted spec: region may not constrain protected parameter '" + p.name + "'");
    if (interval.lo > interval.hi || !p.contains(interval.lo) || !p.contains(interval.hi))
      throw SpecError("planted spec: region " + std::to_string(interval.lo) + ".." +
                      std::to_string(interval.hi) + " outside bounds of '" + p.name + "'");
  }

  if (!spec_.empty_region) {
    fraction_ = 1.0;
    for (const auto& [index, interval] : spec_.region)
      fraction_ *= static_cast<double>(interval.size()) /
                   static_cast<double>(domain_.param(index).range_size());
  }
}

bool PlantedModel::in_region(const PointInput& input) const {
  if (spec_.empty_region) return false;
  for (const auto& [index, interval] : spec_.region)
    if (!interval.contains(input[index])) return false;
  return true;
}

Label PlantedModel::predict(const PointInput& input) const {
  return in_region(input) && input[spec_.biased_param] == spec_.biased_value ? -1 : 1;
}

std::string PlantedModel::digest() const { return digest_of(serialize_model(*this)); }

std::shared_ptr<const PlantedModel> make_planted(const InputDomain& domain, PlantedBiasSpec spec) {
  return std::make_shared<PlantedModel>(domain, std::move(spec));
}

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

Value to_value(std::string_view s, std::size_t line) {
  Value v = 0;
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (s.empty() || ec != std::errc{} || ptr != end)
    throw ParseError("planted spec line " + std::to_string(line) + ": '" + std::string(s) +
                     "' is not an integer");
  return v;
}

}  // namespace

PlantedBiasSpec parse_planted_spec(std::string_view text, const InputDomain& domain) {
  PlantedBiasSpec spec;
  bool has_param = false, has_value = false;
  std::size_t line_no = 0;
  for (std::size_t pos = 0; pos < text.size();) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    auto line = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (const auto h = line.find('#'); h != std::string_view::npos) line = line.substr(0, h);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw ParseError("planted spec line " + std::to_string(line_no) + ": expected 'key = value'");
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));

    if (key == "biased_param") {
      spec.biased_param = domain.index_of(value);
      has_param = true;
    } else if (key == "biased_value") {
      spec.biased_value = to_value(value, line_no);
      has_value = true;
    } else if (key == "empty") {
      if (value != "true" && value != "false")
        throw ParseError("planted spec line " + std::to_string(line_no) + ": empty must be true or false");
      spec.empty_region = value == "true";
    } else if (key.starts_with("region.")) {
      const auto index = domain.index_of(key.substr(7));
      const auto dots = value.find("..");
      if (dots == std::string_view::npos)
        throw ParseError("planted spec line " + std::to_string(line_no) + ": region needs lo..hi");
      if (!spec.region.emplace(index, Interval{to_value(trim(value.substr(0, dots)), line_no),
                                               to_value(trim(value.substr(dots + 2)), line_no)})
               .second)
        throw SchemaError("planted spec line " + std::to_string(line_no) + ": region repeated");
    } else {
      throw SchemaError("planted spec line " + std::to_string(line_no) + ": unknown key '" +
                        std::string(key) + "'");
    }
  }
  if (!has_param) throw SchemaError("planted spec lacks 'biased_param'");
  if (!has_value) throw SchemaError("planted spec lacks 'biased_value'");
  return spec;
}

std::string format_planted_spec(const PlantedBiasSpec& spec, const InputDomain& domain) {
  std::string out = "biased_param = " + domain.param(spec.biased_param).name + "\n";
  out += "biased_value = " + std::to_string(spec.biased_value) + "\n";
  out += std::string("empty = ") + (spec.empty_region ? "true" : "false") + "\n";
  for (const auto& [index, interval] : spec.region)
    out += "region." + domain.param(index).name + " = " + std::to_string(interval.lo) + ".." +
           std::to_string(interval.hi) + "\n";
  return out;
}

}  // namespace fairprobe
