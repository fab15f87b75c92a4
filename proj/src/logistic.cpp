#include <cmath>

#include "fairprobe/digest.hpp"
#include "fairprobe/error.hpp"
#include "fairprobe/models.hpp"

namespace fairprobe {

std::vector<Label> Model::predict_batch(std::span<const PointInput> inputs) const {
  std::vector<Label> out;
  out.reserve(inputs.size());
  for (const auto& in : inputs) out.push_back(predict(in));
  return out;
}

LogisticModel::LogisticModel(const InputDomain& domain, std::vector<double> weights, double bias)
    : weights_(std::move(weights)), bias_(bias) {
  if (weights_.size() != domain.size())
    throw SpecError("logistic model has " + std::to_string(weights_.size()) +
                    " weights, domain has " + std::to_string(domain.size()) + " parameters");
  for (const auto& p : domain.params()) {
    mins_.push_back(p.min_value);
    maxs_.push_back(p.max_value);
  }
}

std::vector<double> LogisticModel::normalize(const PointInput& input) const {
  std::vector<double> x(weights_.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const auto width = static_cast<double>(maxs_[i] - mins_[i]);
    x[i] = width > 0 ? static_cast<double>(input[i] - mins_[i]) / width : 0.0;
  }
  return x;
}

double LogisticModel::decision(const PointInput& input) const {
  const auto x = normalize(input);
  double z = bias_;
  for (std::size_t i = 0; i < x.size(); ++i) z += weights_[i] * x[i];
  return z;
}

Label LogisticModel::predict(const PointInput& input) const { return decision(input) >= 0 ? 1 : -1; }

std::string LogisticModel::digest() const { return digest_of(serialize_model(*this)); }

namespace {

double softplus(double t) { return t > 0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t)); }

double sigmoid(double t) {
  if (t >= 0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

double margin(std::span<const double> w, double b, const std::vector<double>& x) {
  double z = b;
  for (std::size_t i = 0; i < x.size(); ++i) z += w[i] * x[i];
  return z;
}

}  // namespace

double logistic_loss(std::span<const double> weights, double bias,
                     std::span<const std::vector<double>> features, std::span<const Label> labels) {
  double total = 0.0;
  for (std::size_t r = 0; r < features.size(); ++r)
    total += softplus(-labels[r] * margin(weights, bias, features[r]));
  return features.empty() ? 0.0 : total / static_cast<double>(features.size());
}

std::vector<double> logistic_gradient(std::span<const double> weights, double bias,
                                      std::span<const std::vector<double>> features,
                                      std::span<const Label> labels) {
  std::vector<double> grad(weights.size() + 1, 0.0);
  if (features.empty()) return grad;
  for (std::size_t r = 0; r < features.size(); ++r) {
    const double y = labels[r];
    const double coef = -y * sigmoid(-y * margin(weights, bias, features[r]));
    for (std::size_t i = 0; i < weights.size(); ++i) grad[i] += coef * features[r][i];
    grad.back() += coef;
  }
  const double n = static_cast<double>(features.size());
  for (auto& g : grad) g /= n;
  return grad;
}

std::shared_ptr<const LogisticModel> train_logistic(const InputDomain& domain,
                                                    const LabeledDataset& data,
                                                    const LogisticOptions& options) {
  if (data.empty()) throw TrainingError("cannot train logistic model on an empty dataset");
  if (options.epochs < 0) throw TrainingError("epochs must be non-negative");
  if (!(options.learning_rate > 0)) throw TrainingError("learning rate must be positive");

  bool has_pos = false, has_neg = false;
  for (const auto& row : data.rows) {
    if (row.label == 1)
      has_pos = true;
    else if (row.label == -1)
      has_neg = true;
    else
      throw TrainingError("logistic model needs labels in {-1,+1}, got " + std::to_string(row.label));
    domain.require_contains(row.input);
  }
  const std::size_t n = domain.size();
  if (!(has_pos && has_neg))
    return std::make_shared<LogisticModel>(domain, std::vector<double>(n, 0.0), has_pos ? 1.0 : -1.0);

  const LogisticModel scaler(domain, std::vector<double>(n, 0.0), 0.0);
  std::vector<std::vector<double>> features;
  std::vector<Label> labels;
  features.reserve(data.size());
  labels.reserve(data.size());
  for (const auto& row : data.rows) {
    features.push_back(scaler.normalize(row.input));
    labels.push_back(row.label);
  }

  Rng rng(options.seed);
  std::vector<double> w(n);
  for (auto& wi : w) wi = (rng.uniform01() - 0.5) * 0.02;
  double b = 0.0;
  for (int epoch = 0; epoch < options.epochs; ++epoch) {
    const auto g = logistic_gradient(w, b, features, labels);
    for (std::size_t i = 0; i < n; ++i) w[i] -= options.learning_rate * g[i];
    b -= options.learning_rate * g.back();
  }
  return std::make_shared<LogisticModel>(domain, std::move(w), b);
}

}  // namespace fairprobe
