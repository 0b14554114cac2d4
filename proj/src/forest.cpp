#include "wxbench/forest.hpp"

#include "wxbench/errors.hpp"

namespace wxbench {

RfParams RfParams::from_config(const ModelConfig& cfg) {
  RfParams p;
  if (cfg.contains("n_estimators")) p.n_estimators = cfg["n_estimators"].get<int>();
  if (cfg.contains("max_features"))
    p.max_features_fraction = cfg["max_features"].get<double>();
  if (cfg.contains("min_samples_leaf"))
    p.min_samples_leaf = cfg["min_samples_leaf"].get<int>();
  if (cfg.contains("bootstrap")) p.bootstrap = cfg["bootstrap"].get<bool>();
  if (p.n_estimators < 1) throw InvalidParams("n_estimators must be >= 1");
  if (!(p.max_features_fraction > 0.0 && p.max_features_fraction <= 1.0))
    throw InvalidParams("max_features fraction must lie in (0,1]");
  if (p.min_samples_leaf < 1)
    throw InvalidParams("min_samples_leaf must be >= 1");
  return p;
}

nlohmann::json RfParams::to_json() const {
  return {{"n_estimators", n_estimators},
          {"max_features", max_features_fraction},
          {"min_samples_leaf", min_samples_leaf},
          {"bootstrap", bootstrap}};
}

void RandomForest::fit(const Matrix& x, const Matrix& y, std::uint64_t seed) {
  const std::size_t n = x.rows();
  if (n == 0) throw EmptyData("random forest needs data");
  seed_ = seed;
  n_targets_ = y.cols();
  trees_.clear();
  trees_.reserve(static_cast<std::size_t>(params_.n_estimators));

  DtParams tp;
  tp.max_depth = -1;
  tp.min_samples_leaf = params_.min_samples_leaf;
  tp.criterion = DtParams::Criterion::squared_error;
  tp.feature_mode = DtParams::FeatureMode::fraction;
  tp.feature_fraction = params_.max_features_fraction;

  std::vector<double> weights(n);
  for (int e = 0; e < params_.n_estimators; ++e) {
    const std::uint64_t tree_seed =
        derive_seed(seed, fnv1a64("rf_tree"), static_cast<std::uint64_t>(e));
    Rng rng(tree_seed);
    if (params_.bootstrap) {
      // n draws with replacement, stored as multiplicities
      std::fill(weights.begin(), weights.end(), 0.0);
      for (std::size_t i = 0; i < n; ++i) weights[rng.uniform_int(n)] += 1.0;
    } else {
      std::fill(weights.begin(), weights.end(), 1.0);
    }
    trees_.push_back(fit_decision_tree(x, y, weights, tp, rng));
  }
}

Matrix RandomForest::predict(const Matrix& x) const {
  if (trees_.empty()) throw InvalidParams("predict before fit");
  Matrix sum(x.rows(), n_targets_);
  for (const Tree& t : trees_) {
    for (std::size_t r = 0; r < x.rows(); ++r) {
      const TreeNode& leaf = t.route(x.row(r));
      for (std::size_t c = 0; c < n_targets_; ++c) sum(r, c) += leaf.leaf[c];
    }
  }
  const double inv = 1.0 / static_cast<double>(trees_.size());
  for (std::size_t r = 0; r < x.rows(); ++r)
    for (std::size_t c = 0; c < n_targets_; ++c) sum(r, c) *= inv;
  return sum;
}

nlohmann::json RandomForest::to_json() const {
  nlohmann::json trees = nlohmann::json::array();
  for (const Tree& t : trees_) trees.push_back(t.to_json());
  return {{"model", "random_forest"},
          {"params", params_.to_json()},
          {"seed", seed_},
          {"n_targets", n_targets_},
          {"trees", std::move(trees)}};
}

RandomForest RandomForest::from_json(const nlohmann::json& j) {
  RandomForest rf(RfParams::from_config(j.at("params")));
  rf.seed_ = j.at("seed").get<std::uint64_t>();
  rf.n_targets_ = j.at("n_targets").get<std::size_t>();
  for (const auto& tj : j.at("trees")) rf.trees_.push_back(Tree::from_json(tj));
  return rf;
}

}  // namespace wxbench
