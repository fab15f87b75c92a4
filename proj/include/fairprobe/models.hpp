#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fairprobe/dataset.hpp"
#include "fairprobe/domain.hpp"

namespace fairprobe {

enum class ModelKind { logistic, tree, planted, external };

std::string_view to_string(ModelKind kind);
ModelKind parse_model_kind(std::string_view name);

/// Format tag written on the first line of every persisted model.
inline constexpr std::string_view kModelFormatTag = "fairprobe-model-v1";

/// Black-box classifier under test. predict is pure: the same input always
/// yields the same label for the lifetime of the object.
class Model {
 public:
  virtual ~Model() = default;

  virtual ModelKind kind() const = 0;
  virtual const Alphabet& alphabet() const = 0;
  virtual Label predict(const PointInput& input) const = 0;

  /// Same semantics as mapping predict over `inputs`.
  virtual std::vector<Label> predict_batch(std::span<const PointInput> inputs) const;

  /// Stable fingerprint identifying the model's behaviour.
  virtual std::string digest() const = 0;
};

using ModelHandle = std::shared_ptr<const Model>;

// ---------------------------------------------------------------------------
// Logistic regression

struct LogisticOptions {
  int epochs = 500;
  double learning_rate = 0.5;
  std::uint64_t seed = 0;

  bool operator==(const LogisticOptions&) const = default;
};

/// Linear classifier over min-max normalized features: label +1 iff
/// bias + sum_i weight_i * (x_i - min_i) / (max_i - min_i) >= 0.
class LogisticModel final : public Model {
 public:
  LogisticModel(const InputDomain& domain, std::vector<double> weights, double bias);

  ModelKind kind() const override { return ModelKind::logistic; }
  const Alphabet& alphabet() const override { return alphabet_; }
  Label predict(const PointInput& input) const override;
  std::string digest() const override;

  double decision(const PointInput& input) const;
  std::vector<double> normalize(const PointInput& input) const;

  const std::vector<double>& weights() const { return weights_; }
  double bias() const { return bias_; }

 private:
  std::vector<Value> mins_;
  std::vector<Value> maxs_;
  std::vector<double> weights_;
  double bias_;
  Alphabet alphabet_ = binary_alphabet();
};

/// Mean logistic loss mean(log(1 + exp(-y * (b + w.x)))) over normalized rows.
double logistic_loss(std::span<const double> weights, double bias,
                     std::span<const std::vector<double>> features, std::span<const Label> labels);

/// Analytic gradient of logistic_loss; the last element is d/d(bias).
std::vector<double> logistic_gradient(std::span<const double> weights, double bias,
                                      std::span<const std::vector<double>> features,
                                      std::span<const Label> labels);

/// Full-batch gradient descent. Labels must be in {-1, +1}. A single-class
/// dataset yields a constant model for that class. Throws TrainingError.
std::shared_ptr<const LogisticModel> train_logistic(const InputDomain& domain,
                                                    const LabeledDataset& data,
                                                    const LogisticOptions& options = {});

// ---------------------------------------------------------------------------
// Decision tree

struct TreeOptions {
  int max_depth = 8;
  int min_leaf = 1;
  std::uint64_t seed = 0;

  bool operator==(const TreeOptions&) const = default;
};

/// Node in preorder layout. Internal nodes route `x[param] <= threshold` left.
struct TreeNode {
  bool leaf = true;
  std::size_t param = 0;
  Value threshold = 0;
  Label label = 0;
  std::size_t rows = 0;  // training rows reaching the node; 0 when loaded from file
  int left = -1;
  int right = -1;

  bool operator==(const TreeNode&) const = default;
};

class TreeModel final : public Model {
 public:
  TreeModel(std::size_t param_count, std::vector<TreeNode> nodes, Alphabet alphabet);

  ModelKind kind() const override { return ModelKind::tree; }
  const Alphabet& alphabet() const override { return alphabet_; }
  Label predict(const PointInput& input) const override;
  std::string digest() const override;

  const std::vector<TreeNode>& nodes() const { return nodes_; }
  std::size_t param_count() const { return param_count_; }
  int depth() const;

 private:
  std::size_t param_count_;
  std::vector<TreeNode> nodes_;
  Alphabet alphabet_;
};

/// Greedy CART on Gini impurity with integer thresholds. Gains are compared
/// exactly; ties go to the lowest parameter index, then the lowest threshold.
/// Leaves predict the majority label (ties toward the larger label).
std::shared_ptr<const TreeModel> train_tree(const InputDomain& domain, const LabeledDataset& data,
                                            const TreeOptions& options = {});

// ---------------------------------------------------------------------------
// Planted-bias oracle

struct Interval {
  Value lo = 0;
  Value hi = 0;

  Value size() const { return hi - lo + 1; }
  bool contains(Value v) const { return v >= lo && v <= hi; }
  bool operator==(const Interval&) const = default;
};

/// Region over unprotected parameters (unlisted parameters span their full
/// range) inside which `biased_param == biased_value` flips the label to -1.
struct PlantedBiasSpec {
  std::map<std::size_t, Interval> region;
  bool empty_region = false;
  std::size_t biased_param = 0;
  Value biased_value = 0;

  bool operator==(const PlantedBiasSpec&) const = default;
};

class PlantedModel final : public Model {
 public:
  /// Throws SpecError when the planted region or biased value does not fit the domain.
  PlantedModel(InputDomain domain, PlantedBiasSpec spec);

  ModelKind kind() const override { return ModelKind::planted; }
  const Alphabet& alphabet() const override { return alphabet_; }
  Label predict(const PointInput& input) const override;
  std::string digest() const override;

  bool in_region(const PointInput& input) const;
  /// Exact discriminatory fraction: region volume / unprotected volume.
  double exact_fraction() const { return fraction_; }

  const PlantedBiasSpec& spec() const { return spec_; }
  const InputDomain& domain() const { return domain_; }

 private:
  InputDomain domain_;
  PlantedBiasSpec spec_;
  double fraction_ = 0.0;
  Alphabet alphabet_ = binary_alphabet();
};

std::shared_ptr<const PlantedModel> make_planted(const InputDomain& domain, PlantedBiasSpec spec);

/// Planted spec text:
///
///     biased_param = gender
///     biased_value = 1
///     region.age = 30..39
///     empty = false
PlantedBiasSpec parse_planted_spec(std::string_view text, const InputDomain& domain);
std::string format_planted_spec(const PlantedBiasSpec& spec, const InputDomain& domain);

// ---------------------------------------------------------------------------
// Persistence

/// Serializes logistic, tree and planted models; throws ContractError for
/// external handles.
std::string serialize_model(const Model& model);
ModelHandle parse_model(std::string_view text, const InputDomain& domain);

void save_model(const std::filesystem::path& path, const Model& model);
ModelHandle load_model(const std::filesystem::path& path, const InputDomain& domain);

/// Shortest round-trip decimal form of a double.
std::string format_double(double value);

}  // namespace fairprobe
