#pragma once

#include <cstdint>
#include <vector>

#include "wxbench/tree.hpp"

namespace wxbench {

struct RfParams {
  int n_estimators = 100;
  double max_features_fraction = 0.7;  // per split
  int min_samples_leaf = 1;
  bool bootstrap = true;

  static RfParams from_config(const ModelConfig& cfg);
  nlohmann::json to_json() const;
};

// Bagged ensemble of unpruned CART trees; prediction is the unweighted mean
// of the member predictions.
class RandomForest : public TabularModel {
 public:
  explicit RandomForest(RfParams params) : params_(params) {}
  explicit RandomForest(const ModelConfig& cfg)
      : RandomForest(RfParams::from_config(cfg)) {}

  void fit(const Matrix& x, const Matrix& y, std::uint64_t seed) override;
  Matrix predict(const Matrix& x) const override;
  nlohmann::json to_json() const override;
  static RandomForest from_json(const nlohmann::json& j);

  const std::vector<Tree>& trees() const { return trees_; }

 private:
  RfParams params_;
  std::vector<Tree> trees_;
  std::size_t n_targets_ = 0;
  std::uint64_t seed_ = 0;
};

}  // namespace wxbench
