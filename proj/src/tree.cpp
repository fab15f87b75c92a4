#include <algorithm>
#include <numeric>
#include <set>

#include "fairprobe/digest.hpp"
#include "fairprobe/error.hpp"
#include "fairprobe/models.hpp"

namespace fairprobe {

TreeModel::TreeModel(std::size_t param_count, std::vector<TreeNode> nodes, Alphabet alphabet)
    : param_count_(param_count), nodes_(std::move(nodes)), alphabet_(std::move(alphabet)) {
  if (nodes_.empty()) throw SpecError("tree has no nodes");
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const auto& n = nodes_[i];
    if (n.leaf) {
      if (std::find(alphabet_.begin(), alphabet_.end(), n.label) == alphabet_.end())
        throw SpecError("tree leaf label " + std::to_string(n.label) + " not in alphabet");
      continue;
    }
    const auto size = static_cast<int>(nodes_.size());
    if (n.param >= param_count_ || n.left <= static_cast<int>(i) || n.right <= static_cast<int>(i) ||
        n.left >= size || n.right >= size)
      throw SpecError("malformed tree node " + std::to_string(i));
  }
}

Label TreeModel::predict(const PointInput& input) const {
  std::size_t i = 0;
  while (!nodes_[i].leaf) {
    const auto& n = nodes_[i];
    i = static_cast<std::size_t>(input[n.param] <= n.threshold ? n.left : n.right);
  }
  return nodes_[i].label;
}

int TreeModel::depth() const {
  // Preorder layout: children always follow their parent.
  std::vector<int> d(nodes_.size(), 0);
  int deepest = 0;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    deepest = std::max(deepest, d[i]);
    if (!nodes_[i].leaf) {
      d[static_cast<std::size_t>(nodes_[i].left)] = d[i] + 1;
      d[static_cast<std::size_t>(nodes_[i].right)] = d[i] + 1;
    }
  }
  return deepest;
}

std::string TreeModel::digest() const { return digest_of(serialize_model(*this)); }

namespace {

__extension__ typedef __int128 Wide;

struct Builder {
  const LabeledDataset& data;
  const TreeOptions& opt;
  std::size_t n_params;
  Alphabet classes;  // sorted distinct labels present in the data
  std::vector<std::size_t> class_of;  // per row
  std::vector<TreeNode> nodes;

  std::vector<std::size_t> counts(std::span<const std::size_t> rows) const {
    std::vector<std::size_t> c(classes.size(), 0);
    for (const auto r : rows) ++c[class_of[r]];
    return c;
  }

  static Wide sum_squares(const std::vector<std::size_t>& c) {
    Wide s = 0;
    for (const auto k : c) s += static_cast<Wide>(k) * static_cast<Wide>(k);
    return s;
  }

  Label majority(const std::vector<std::size_t>& c) const {
    std::size_t best = 0;
    for (std::size_t k = 1; k < c.size(); ++k)
      if (c[k] >= c[best]) best = k;  // ties toward the larger label
    return classes[best];
  }

  struct Split {
    bool found = false;
    std::size_t param = 0;
    Value threshold = 0;
    Wide num = 0;  // score = num / den, score = sum over children of (sum_k n_ck^2) / n_c
    Wide den = 1;
  };

  Split best_split(std::vector<std::size_t>& rows, const std::vector<std::size_t>& parent) const {
    const auto total = static_cast<Wide>(rows.size());
    const Wide parent_sq = sum_squares(parent);
    const auto min_leaf = static_cast<std::size_t>(std::max(1, opt.min_leaf));
    Split best;
    // Any accepted split must beat the parent: score > parent_sq / total.
    best.num = parent_sq;
    best.den = total;

    for (std::size_t p = 0; p < n_params; ++p) {
      std::stable_sort(rows.begin(), rows.end(), [&](std::size_t a, std::size_t b) {
        return data.rows[a].input[p] < data.rows[b].input[p];
      });
      std::vector<std::size_t> left(classes.size(), 0), right = parent;
      for (std::size_t i = 0; i + 1 < rows.size(); ++i) {
        const auto k = class_of[rows[i]];
        ++left[k];
        --right[k];
        const Value here = data.rows[rows[i]].input[p];
        const Value next = data.rows[rows[i + 1]].input[p];
        if (here == next) continue;
        const std::size_t n_left = i + 1, n_right = rows.size() - n_left;
        if (n_left < min_leaf || n_right < min_leaf) continue;
        const Wide nl = static_cast<Wide>(n_left), nr = static_cast<Wide>(n_right);
        const Wide num = sum_squares(left) * nr + sum_squares(right) * nl;
        const Wide den = nl * nr;
        if (num * best.den > best.num * den) {
          best = Split{true, p, here, num, den};
        }
      }
    }
    return best;
  }

  int grow(std::vector<std::size_t> rows, int depth) {
    const auto c = counts(rows);
    const auto idx = static_cast<int>(nodes.size());
    TreeNode node;
    node.rows = rows.size();
    node.label = majority(c);
    nodes.push_back(node);

    const bool pure = std::count_if(c.begin(), c.end(), [](auto k) { return k > 0; }) <= 1;
    if (pure || depth >= opt.max_depth) return idx;
    const auto split = best_split(rows, c);
    if (!split.found) return idx;

    std::vector<std::size_t> left_rows, right_rows;
    for (const auto r : rows)
      (data.rows[r].input[split.param] <= split.threshold ? left_rows : right_rows).push_back(r);
    rows.clear();
    rows.shrink_to_fit();

    const int l = grow(std::move(left_rows), depth + 1);
    const int r = grow(std::move(right_rows), depth + 1);
    auto& me = nodes[static_cast<std::size_t>(idx)];
    me.leaf = false;
    me.param = split.param;
    me.threshold = split.threshold;
    me.left = l;
    me.right = r;
    return idx;
  }
};

}  // namespace

std::shared_ptr<const TreeModel> train_tree(const InputDomain& domain, const LabeledDataset& data,
                                            const TreeOptions& options) {
  if (data.empty()) throw TrainingError("cannot train tree on an empty dataset");
  if (options.max_depth < 0) throw TrainingError("max_depth must be non-negative");
  if (options.min_leaf < 1) throw TrainingError("min_leaf must be at least 1");

  std::set<Label> present;
  for (const auto& row : data.rows) {
    domain.require_contains(row.input);
    present.insert(row.label);
  }
  Builder b{data, options, domain.size(), Alphabet(present.begin(), present.end()), {}, {}};
  b.class_of.reserve(data.size());
  for (const auto& row : data.rows)
    b.class_of.push_back(static_cast<std::size_t>(
        std::lower_bound(b.classes.begin(), b.classes.end(), row.label) - b.classes.begin()));

  std::vector<std::size_t> all(data.size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  b.grow(std::move(all), 0);

  std::set<Label> alphabet(present);
  alphabet.insert(-1);
  alphabet.insert(1);
  return std::make_shared<TreeModel>(domain.size(), std::move(b.nodes),
                                     Alphabet(alphabet.begin(), alphabet.end()));
}

}  // namespace fairprobe
