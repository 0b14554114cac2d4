#pragma once

#include <cstdint>
#include <vector>

#include "wxbench/tree.hpp"

namespace wxbench {

struct GbtParams {
  int n_estimators = 100;
  int max_depth = 3;
  double learning_rate = 0.1;
  double subsample = 1.0;         // row fraction per round, without replacement
  double colsample_bytree = 1.0;  // feature fraction per tree
  double gamma = 0.0;             // minimum loss reduction to split
  double lambda = 1.0;            // L2 on leaf weights

  static GbtParams from_config(const ModelConfig& cfg);
  nlohmann::json to_json() const;
};

// Second-order boosted regression trees for squared-error loss on a single
// target (g = F - y, h = 1). Split gain
//   1/2 [ G_L^2/(H_L+l) + G_R^2/(H_R+l) - (G_L+G_R)^2/(H_L+H_R+l) ] - gamma
// must be strictly positive; leaf weight is -G/(H+l). The ensemble starts at
// the training-target mean and every round adds learning_rate * tree(x) for
// all rows, subsampled or not.
class GradientBoostedTrees : public TabularModel {
 public:
  explicit GradientBoostedTrees(GbtParams params) : params_(params) {}
  explicit GradientBoostedTrees(const ModelConfig& cfg)
      : GradientBoostedTrees(GbtParams::from_config(cfg)) {}

  void fit(const Matrix& x, const Matrix& y, std::uint64_t seed) override;
  Matrix predict(const Matrix& x) const override;
  nlohmann::json to_json() const override;
  static GradientBoostedTrees from_json(const nlohmann::json& j);

  double base_score() const { return base_score_; }
  const std::vector<Tree>& trees() const { return trees_; }
  // mean squared training error after each round (index 0 = after round 1)
  const std::vector<double>& training_loss() const { return training_loss_; }

 private:
  GbtParams params_;
  double base_score_ = 0.0;
  std::vector<Tree> trees_;
  std::vector<double> training_loss_;
  std::uint64_t seed_ = 0;
};

}  // namespace wxbench
