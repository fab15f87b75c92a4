#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "fairprobe/domain.hpp"

namespace fairprobe {

/// Classifier output. Labels are integers so that |f(I) - f(I')| is defined.
using Label = int;
using Alphabet = std::vector<Label>;

inline Alphabet binary_alphabet() { return {-1, 1}; }

struct LabeledRow {
  PointInput input;
  Label label = 0;

  bool operator==(const LabeledRow&) const = default;
};

struct LabeledDataset {
  std::vector<LabeledRow> rows;
  std::string source;

  std::size_t size() const { return rows.size(); }
  bool empty() const { return rows.empty(); }
};

/// Parses comma-separated integer data with a header row. Columns may appear
/// in any order; extra columns are ignored. Errors: SchemaError for a missing
/// column, ParseError for a non-integer cell, BoundError for an out-of-range
/// value (all carry the 1-based data row number).
LabeledDataset parse_csv(std::string_view text, const InputDomain& domain,
                         std::string_view label_column, std::string source = "<memory>");
LabeledDataset load_csv(const std::filesystem::path& path, const InputDomain& domain,
                        std::string_view label_column);

/// Header is the domain parameters in index order followed by the label column.
std::string format_csv(const LabeledDataset& data, const InputDomain& domain,
                       std::string_view label_column);
void write_csv(const std::filesystem::path& path, const LabeledDataset& data,
               const InputDomain& domain, std::string_view label_column);

}  // namespace fairprobe
