#include "fairprobe/dataset.hpp"

#include <charconv>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>

#include "fairprobe/error.hpp"

namespace fairprobe {
namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  for (;;) {
    const auto comma = line.find(',', start);
    cells.push_back(trim(line.substr(start, comma == std::string_view::npos ? comma : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return cells;
}

std::optional<Value> to_int(std::string_view cell) {
  Value v = 0;
  if (!cell.empty() && cell.front() == '+') cell.remove_prefix(1);
  const auto* end = cell.data() + cell.size();
  auto [ptr, ec] = std::from_chars(cell.data(), end, v);
  if (cell.empty() || ec != std::errc{} || ptr != end) return std::nullopt;
  return v;
}

}  // namespace

LabeledDataset parse_csv(std::string_view text, const InputDomain& domain,
                         std::string_view label_column, std::string source) {
  LabeledDataset out;
  out.source = std::move(source);

  std::vector<std::string_view> lines;
  for (std::size_t pos = 0; pos < text.size();) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    lines.push_back(text.substr(pos, nl - pos));
    pos = nl + 1;
  }
  std::size_t first = 0;
  while (first < lines.size() && trim(lines[first]).empty()) ++first;
  if (first == lines.size()) throw SchemaError(out.source + ": missing header row");

  const auto header = split_commas(lines[first]);
  auto find_column = [&](std::string_view name) {
    for (std::size_t c = 0; c < header.size(); ++c)
      if (header[c] == name) return c;
    throw SchemaError(out.source + ": missing column '" + std::string(name) + "'");
  };
  std::vector<std::size_t> column_of(domain.size());
  for (const auto& p : domain.params()) column_of[p.index] = find_column(p.name);
  const std::size_t label_col = find_column(label_column);

  std::size_t row_no = 0;
  for (std::size_t li = first + 1; li < lines.size(); ++li) {
    if (trim(lines[li]).empty()) continue;
    ++row_no;
    const auto cells = split_commas(lines[li]);
    if (cells.size() != header.size())
      throw ParseError(out.source + ": row " + std::to_string(row_no) + " has " +
                       std::to_string(cells.size()) + " cells, header has " +
                       std::to_string(header.size()));
    auto cell_int = [&](std::size_t c, std::string_view column) {
      const auto v = to_int(cells[c]);
      if (!v)
        throw ParseError(out.source + ": row " + std::to_string(row_no) + ", column '" +
                         std::string(column) + "': '" + std::string(cells[c]) +
                         "' is not an integer");
      return *v;
    };

    LabeledRow row;
    row.input.values.resize(domain.size());
    for (const auto& p : domain.params()) {
      const Value v = cell_int(column_of[p.index], p.name);
      if (!p.contains(v))
        throw BoundError(out.source + ": row " + std::to_string(row_no) + ", column '" + p.name +
                         "': value " + std::to_string(v) + " outside [" +
                         std::to_string(p.min_value) + "," + std::to_string(p.max_value) + "]");
      row.input[p.index] = v;
    }
    const Value label = cell_int(label_col, label_column);
    if (label < std::numeric_limits<Label>::min() || label > std::numeric_limits<Label>::max())
      throw BoundError(out.source + ": row " + std::to_string(row_no) + ": label out of range");
    row.label = static_cast<Label>(label);
    out.rows.push_back(std::move(row));
  }
  return out;
}

LabeledDataset load_csv(const std::filesystem::path& path, const InputDomain& domain,
                        std::string_view label_column) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SchemaError("cannot open CSV file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_csv(ss.str(), domain, label_column, path.string());
}

std::string format_csv(const LabeledDataset& data, const InputDomain& domain,
                       std::string_view label_column) {
  std::string out;
  for (const auto& p : domain.params()) out += p.name + ",";
  out += std::string(label_column) + "\n";
  for (const auto& row : data.rows) {
    for (const auto v : row.input.values) out += std::to_string(v) + ",";
    out += std::to_string(row.label) + "\n";
  }
  return out;
}

void write_csv(const std::filesystem::path& path, const LabeledDataset& data,
               const InputDomain& domain, std::string_view label_column) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw SchemaError("cannot write CSV file " + path.string());
  out << format_csv(data, domain, label_column);
}

}  // namespace fairprobe
