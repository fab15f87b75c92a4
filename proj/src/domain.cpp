#include "fairprobe/domain.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "fairprobe/digest.hpp"
#include "fairprobe/error.hpp"

namespace fairprobe {

std::string hex64(std::uint64_t value) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(value));
  return buf;
}

std::string to_string(const PointInput& input) {
  std::string out = "[";
  for (std::size_t i = 0; i < input.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(input[i]);
  }
  out += ']';
  return out;
}

InputDomain::InputDomain(std::vector<ParameterSpec> params) : params_(std::move(params)) {
  std::set<std::string> seen;
  for (std::size_t i = 0; i < params_.size(); ++i) {
    auto& p = params_[i];
    p.index = i;
    if (p.name.empty()) throw SpecError("parameter " + std::to_string(i) + " has an empty name");
    if (!seen.insert(p.name).second) throw SpecError("duplicate parameter name '" + p.name + "'");
    if (p.min_value > p.max_value)
      throw SpecError("parameter '" + p.name + "': min " + std::to_string(p.min_value) +
                      " exceeds max " + std::to_string(p.max_value));
    (p.is_protected ? protected_ : unprotected_).push_back(i);
  }
  if (protected_.empty()) throw SpecError("domain needs at least one protected parameter");
  if (unprotected_.empty()) throw SpecError("domain needs at least one non-protected parameter");
}

std::size_t InputDomain::index_of(std::string_view name) const {
  for (const auto& p : params_)
    if (p.name == name) return p.index;
  throw SchemaError("unknown parameter '" + std::string(name) + "'");
}

bool InputDomain::has(std::string_view name) const {
  return std::any_of(params_.begin(), params_.end(), [&](const auto& p) { return p.name == name; });
}

bool InputDomain::contains(const PointInput& input) const {
  if (input.size() != params_.size()) return false;
  for (std::size_t i = 0; i < params_.size(); ++i)
    if (!params_[i].contains(input[i])) return false;
  return true;
}

void InputDomain::require_contains(const PointInput& input) const {
  if (input.size() != params_.size())
    throw BoundError("input has " + std::to_string(input.size()) + " values, domain has " +
                     std::to_string(params_.size()) + " parameters");
  for (std::size_t i = 0; i < params_.size(); ++i) {
    if (!params_[i].contains(input[i]))
      throw BoundError("value " + std::to_string(input[i]) + " of parameter '" + params_[i].name +
                       "' outside [" + std::to_string(params_[i].min_value) + "," +
                       std::to_string(params_[i].max_value) + "]");
  }
}

double InputDomain::cardinality() const {
  double total = 1.0;
  for (const auto& p : params_) total *= static_cast<double>(p.range_size());
  return total;
}

std::size_t InputDomain::variant_count() const {
  std::size_t total = 1;
  for (const auto i : protected_) total *= static_cast<std::size_t>(params_[i].range_size());
  return total;
}

std::string InputDomain::digest() const { return digest_of(format_domain(*this)); }

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

Value parse_value(std::string_view text, std::size_t line) {
  Value v = 0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc{} || ptr != end)
    throw ParseError("domain line " + std::to_string(line) + ": '" + std::string(text) +
                     "' is not an integer");
  return v;
}

struct PendingParam {
  ParameterSpec spec;
  bool has_name = false, has_min = false, has_max = false, has_protected = false;
  std::size_t first_line = 0;

  bool empty() const { return !(has_name || has_min || has_max || has_protected); }
};

}  // namespace

InputDomain parse_domain(std::string_view text) {
  std::vector<ParameterSpec> params;
  PendingParam cur;

  auto flush = [&](std::size_t line) {
    if (cur.empty()) return;
    const char* missing = !cur.has_name ? "name"
                          : !cur.has_min ? "min"
                          : !cur.has_max ? "max"
                          : !cur.has_protected ? "protected"
                                               : nullptr;
    if (missing)
      throw SchemaError("domain block ending at line " + std::to_string(line) + " lacks key '" +
                        missing + "'");
    params.push_back(cur.spec);
    cur = PendingParam{};
  };

  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;

    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) {
      flush(line_no);
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw ParseError("domain line " + std::to_string(line_no) + ": expected 'key = value'");
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    if (cur.empty()) cur.first_line = line_no;

    auto once = [&](bool& flag) {
      if (flag)
        throw SchemaError("domain line " + std::to_string(line_no) + ": key '" + std::string(key) +
                          "' repeated within a block");
      flag = true;
    };
    if (key == "name") {
      once(cur.has_name);
      cur.spec.name = std::string(value);
    } else if (key == "min") {
      once(cur.has_min);
      cur.spec.min_value = parse_value(value, line_no);
    } else if (key == "max") {
      once(cur.has_max);
      cur.spec.max_value = parse_value(value, line_no);
    } else if (key == "protected") {
      once(cur.has_protected);
      if (value == "true")
        cur.spec.is_protected = true;
      else if (value == "false")
        cur.spec.is_protected = false;
      else
        throw ParseError("domain line " + std::to_string(line_no) +
                         ": protected must be true or false");
    } else {
      throw SchemaError("domain line " + std::to_string(line_no) + ": unknown key '" +
                        std::string(key) + "'");
    }
  }
  flush(line_no);
  return InputDomain(std::move(params));
}

InputDomain load_domain(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SchemaError("cannot open domain file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_domain(ss.str());
}

std::string format_domain(const InputDomain& domain) {
  std::string out;
  for (const auto& p : domain.params()) {
    if (!out.empty()) out += '\n';
    out += "name = " + p.name + "\n";
    out += "min = " + std::to_string(p.min_value) + "\n";
    out += "max = " + std::to_string(p.max_value) + "\n";
    out += std::string("protected = ") + (p.is_protected ? "true" : "false") + "\n";
  }
  return out;
}

PointInput sample_uniform(const InputDomain& domain, Rng& rng) {
  PointInput out;
  out.values.reserve(domain.size());
  for (const auto& p : domain.params()) out.values.push_back(rng.uniform_int(p.min_value, p.max_value));
  return out;
}

std::vector<PointInput> protected_variants(const PointInput& input, const InputDomain& domain) {
  const auto& prot = domain.protected_indices();
  std::vector<PointInput> out;
  out.reserve(domain.variant_count());

  // Odometer over protected parameters; the last protected index varies fastest.
  PointInput cur = input;
  for (const auto i : prot) cur[i] = domain.param(i).min_value;
  for (;;) {
    out.push_back(cur);
    std::size_t k = prot.size();
    while (k > 0) {
      const auto i = prot[k - 1];
      if (cur[i] < domain.param(i).max_value) {
        ++cur[i];
        break;
      }
      cur[i] = domain.param(i).min_value;
      --k;
    }
    if (k == 0) break;
  }
  return out;
}

std::size_t variant_position(const PointInput& input, const InputDomain& domain) {
  std::size_t pos = 0;
  for (const auto i : domain.protected_indices()) {
    const auto& p = domain.param(i);
    pos = pos * static_cast<std::size_t>(p.range_size()) + static_cast<std::size_t>(input[i] - p.min_value);
  }
  return pos;
}

}  // namespace fairprobe
