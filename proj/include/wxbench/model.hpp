#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "wxbench/matrix.hpp"

namespace wxbench {

enum class Family : int { svr = 0, mlp, rf, dt, lstm, cnn_lstm, xgb };

struct FamilyTraits {
  Family family;
  std::string name;
  bool native_multi_output;  // false => per-target wrapper
  bool sequence_input;       // true => sliding-window tensors
  bool needs_scaling;        // standardized features
};

const FamilyTraits& family_traits(Family f);
Family family_from_name(const std::string& name);  // throws InvalidParams
const std::vector<Family>& all_families();
std::string valid_family_names();  // comma-separated, for error messages

// One concrete hyperparameter choice: {"max_depth": 5, ...}. Values are JSON
// scalars or arrays (MLP layer shapes).
using ModelConfig = nlohmann::json;

// Ordered search space: parameter name -> candidate values. Enumeration is
// the Cartesian product in lexicographic order (parameter names sorted, the
// last parameter cycling fastest).
class HyperGrid {
 public:
  HyperGrid() = default;

  void set(const std::string& param, std::vector<nlohmann::json> values);
  bool has(const std::string& param) const { return values_.count(param) > 0; }
  std::size_t config_count() const;
  ModelConfig config_at(std::size_t index) const;
  std::vector<ModelConfig> enumerate() const;
  bool empty() const { return values_.empty(); }
  const std::map<std::string, std::vector<nlohmann::json>>& values() const {
    return values_;
  }

 private:
  std::map<std::string, std::vector<nlohmann::json>> values_;
};

// Uniform interface over the five tabular model families (the sequence
// models live behind SequenceModel in sequence.hpp). Y is n x m with m the
// target count the family was built for.
class TabularModel {
 public:
  virtual ~TabularModel() = default;
  virtual void fit(const Matrix& x, const Matrix& y, std::uint64_t seed) = 0;
  virtual Matrix predict(const Matrix& x) const = 0;
  virtual nlohmann::json to_json() const = 0;
};

using SingleTargetFactory =
    std::function<std::unique_ptr<TabularModel>(const ModelConfig&)>;

// Per-target wrapper: fits one clone per Y column with identical
// hyperparameters and a per-target derived seed; predictions are stacked
// column-wise in target order.
class MultiOutputWrapper : public TabularModel {
 public:
  MultiOutputWrapper(SingleTargetFactory factory, ModelConfig config);
  // Rebuilds a fitted wrapper from deserialized parts; such a wrapper can
  // predict but not refit.
  static MultiOutputWrapper from_parts(
      ModelConfig config, std::vector<std::unique_ptr<TabularModel>> parts);

  void fit(const Matrix& x, const Matrix& y, std::uint64_t seed) override;
  Matrix predict(const Matrix& x) const override;
  nlohmann::json to_json() const override;

  // seed used for target column j, exposed so the wrapper-equivalence
  // contract is testable
  static std::uint64_t target_seed(std::uint64_t seed, std::size_t target);

  const std::vector<std::unique_ptr<TabularModel>>& parts() const {
    return parts_;
  }

 private:
  SingleTargetFactory factory_;
  ModelConfig config_;
  std::vector<std::unique_ptr<TabularModel>> parts_;
};

}  // namespace wxbench
