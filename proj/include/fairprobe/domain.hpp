#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "fairprobe/rng.hpp"

namespace fairprobe {

using Value = std::int64_t;

struct ParameterSpec {
  std::string name;
  std::size_t index = 0;
  Value min_value = 0;
  Value max_value = 0;
  bool is_protected = false;

  Value range_size() const { return max_value - min_value + 1; }
  bool contains(Value v) const { return v >= min_value && v <= max_value; }

  bool operator==(const ParameterSpec&) const = default;
};

/// One concrete input: an integer per parameter, ordered by parameter index.
struct PointInput {
  std::vector<Value> values;

  std::size_t size() const { return values.size(); }
  Value operator[](std::size_t i) const { return values[i]; }
  Value& operator[](std::size_t i) { return values[i]; }

  auto operator<=>(const PointInput&) const = default;
  bool operator==(const PointInput&) const = default;
};

std::string to_string(const PointInput& input);

/// Ordered integer parameter specs with a nonempty protected subset and a
/// nonempty unprotected subset. Immutable after construction.
class InputDomain {
 public:
  /// Validates and re-indexes `params` in the given order. Throws SpecError.
  explicit InputDomain(std::vector<ParameterSpec> params);

  std::size_t size() const { return params_.size(); }
  const std::vector<ParameterSpec>& params() const { return params_; }
  const ParameterSpec& param(std::size_t i) const { return params_.at(i); }

  const std::vector<std::size_t>& protected_indices() const { return protected_; }
  const std::vector<std::size_t>& unprotected_indices() const { return unprotected_; }

  /// Index of the parameter called `name`; throws SchemaError when absent.
  std::size_t index_of(std::string_view name) const;
  bool has(std::string_view name) const;

  bool contains(const PointInput& input) const;
  /// Throws BoundError naming the first offending parameter.
  void require_contains(const PointInput& input) const;

  /// |I| as a double; exact while below 2^53.
  double cardinality() const;
  /// Number of inputs sharing one unprotected projection.
  std::size_t variant_count() const;

  /// FNV-1a over the canonical domain text, as 16 hex digits.
  std::string digest() const;

  bool operator==(const InputDomain& other) const { return params_ == other.params_; }

 private:
  std::vector<ParameterSpec> params_;
  std::vector<std::size_t> protected_;
  std::vector<std::size_t> unprotected_;
};

/// Parses the key-value domain format:
///
///     name = age
///     min = 17
///     max = 90
///     protected = false
///
/// One parameter per block, blocks separated by blank lines, `#` starts a
/// comment. Parameter order in the file defines the index order.
InputDomain parse_domain(std::string_view text);
InputDomain load_domain(const std::filesystem::path& path);
std::string format_domain(const InputDomain& domain);

/// Each parameter drawn independently and uniformly from its integer range.
PointInput sample_uniform(const InputDomain& domain, Rng& rng);

/// All inputs that agree with `input` on every unprotected parameter, in
/// lexicographic order over protected parameter indices then values. The
/// input itself is one of them.
std::vector<PointInput> protected_variants(const PointInput& input, const InputDomain& domain);

/// Position of `input` inside protected_variants(input, domain).
std::size_t variant_position(const PointInput& input, const InputDomain& domain);

}  // namespace fairprobe
