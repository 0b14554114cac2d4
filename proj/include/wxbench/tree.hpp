#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <json.hpp>

#include "wxbench/matrix.hpp"
#include "wxbench/model.hpp"
#include "wxbench/rng.hpp"

namespace wxbench {

// Flat binary regression tree. Internal nodes route rows with
// x[feature] <= threshold -> left; leaves hold one value per target.
struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  std::vector<double> leaf;
};

struct Tree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root
  std::size_t n_features = 0;

  bool empty() const { return nodes.empty(); }
  const TreeNode& route(std::span<const double> row) const;
  Matrix predict(const Matrix& x, std::size_t n_targets) const;

  nlohmann::json to_json() const;
  static Tree from_json(const nlohmann::json& j);
};

struct DtParams {
  enum class Criterion { squared_error, friedman_mse };
  enum class FeatureMode { all, sqrt_mode, log2_mode, fraction };

  int max_depth = -1;  // -1 = unbounded
  int min_samples_leaf = 1;
  Criterion criterion = Criterion::squared_error;
  FeatureMode feature_mode = FeatureMode::all;
  double feature_fraction = 1.0;  // used when feature_mode == fraction

  static DtParams from_config(const ModelConfig& cfg);
  nlohmann::json to_json() const;
};

// CART regressor grown greedily: candidate thresholds are midpoints between
// consecutive distinct sorted values, scanned exhaustively over the node's
// feature subset; equal-gain ties go to the lowest feature index, then the
// lowest threshold. Row weights act as sample multiplicities so a bootstrap
// resample is just an integer weight vector.
Tree fit_decision_tree(const Matrix& x, const Matrix& y,
                       const std::vector<double>& weights,
                       const DtParams& params, Rng& rng);

class DecisionTree : public TabularModel {
 public:
  explicit DecisionTree(DtParams params) : params_(params) {}
  explicit DecisionTree(const ModelConfig& cfg)
      : DecisionTree(DtParams::from_config(cfg)) {}

  void fit(const Matrix& x, const Matrix& y, std::uint64_t seed) override;
  Matrix predict(const Matrix& x) const override;
  nlohmann::json to_json() const override;
  static DecisionTree from_json(const nlohmann::json& j);

  const Tree& tree() const { return tree_; }
  const DtParams& params() const { return params_; }

 private:
  DtParams params_;
  Tree tree_;
  std::size_t n_targets_ = 0;
  std::uint64_t seed_ = 0;
};

}  // namespace wxbench
