#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "fairprobe/domain.hpp"
#include "fairprobe/models.hpp"

namespace fairprobe::testing {

inline ParameterSpec param(std::string name, Value lo, Value hi, bool is_protected = false) {
  ParameterSpec p;
  p.name = std::move(name);
  p.min_value = lo;
  p.max_value = hi;
  p.is_protected = is_protected;
  return p;
}

// x0, x1 in [0, hi], binary protected g last.
inline InputDomain grid_domain(Value hi = 99) {
  return InputDomain({param("x0", 0, hi), param("x1", 0, hi), param("g", 0, 1, true)});
}

inline PointInput pt(std::vector<Value> v) { return PointInput{std::move(v)}; }

// Planted model with region x1 in [lo, hi] (x0 unrestricted) biased on g == 1.
inline std::shared_ptr<const PlantedModel> band_model(const InputDomain& d, Value lo, Value hi) {
  PlantedBiasSpec spec;
  spec.region[d.index_of("x1")] = {lo, hi};
  spec.biased_param = d.index_of("g");
  spec.biased_value = 1;
  return make_planted(d, spec);
}

struct TempDir {
  std::filesystem::path path;
  TempDir() {
    path = std::filesystem::temp_directory_path() /
           ("fairprobe-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter()++));
    std::filesystem::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
  std::filesystem::path file(const std::string& name, const std::string& contents) const {
    const auto p = path / name;
    std::ofstream(p, std::ios::binary) << contents;
    return p;
  }
  static int& counter() {
    static int n = 0;
    return n;
  }
};

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace fairprobe::testing

namespace fairprobe::testing {

// Upper 0.001 quantile of chi-square with k degrees of freedom (Wilson-Hilferty).
inline double chi2_critical_001(double k) {
  const double z = 3.090232306167813;
  const double a = 2.0 / (9.0 * k);
  const double c = 1.0 - a + z * std::sqrt(a);
  return k * c * c * c;
}

inline double chi2_statistic(const std::vector<double>& observed, const std::vector<double>& expected) {
  double s = 0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    const double d = observed[i] - expected[i];
    s += d * d / expected[i];
  }
  return s;
}

}  // namespace fairprobe::testing

#include <atomic>
#include <functional>

namespace fairprobe::testing {

// Wraps a function as a Model and counts evaluated inputs.
class FnModel final : public Model {
 public:
  explicit FnModel(std::function<Label(const PointInput&)> fn, Alphabet alphabet = binary_alphabet())
      : fn_(std::move(fn)), alphabet_(std::move(alphabet)) {}
  ModelKind kind() const override { return ModelKind::external; }
  const Alphabet& alphabet() const override { return alphabet_; }
  Label predict(const PointInput& x) const override {
    ++evaluations;
    return fn_(x);
  }
  std::string digest() const override { return "fn"; }

  mutable std::atomic<std::uint64_t> evaluations{0};

 private:
  std::function<Label(const PointInput&)> fn_;
  Alphabet alphabet_;
};

}  // namespace fairprobe::testing
