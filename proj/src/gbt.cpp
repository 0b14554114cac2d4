#include "wxbench/gbt.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "wxbench/errors.hpp"

namespace wxbench {

GbtParams GbtParams::from_config(const ModelConfig& cfg) {
  GbtParams p;
  if (cfg.contains("n_estimators")) p.n_estimators = cfg["n_estimators"].get<int>();
  if (cfg.contains("max_depth")) p.max_depth = cfg["max_depth"].get<int>();
  if (cfg.contains("learning_rate"))
    p.learning_rate = cfg["learning_rate"].get<double>();
  if (cfg.contains("subsample")) p.subsample = cfg["subsample"].get<double>();
  if (cfg.contains("colsample_bytree"))
    p.colsample_bytree = cfg["colsample_bytree"].get<double>();
  if (cfg.contains("gamma")) p.gamma = cfg["gamma"].get<double>();
  if (cfg.contains("lambda")) p.lambda = cfg["lambda"].get<double>();
  if (p.n_estimators < 1) throw InvalidParams("n_estimators must be >= 1");
  if (p.max_depth < 1) throw InvalidParams("max_depth must be >= 1");
  if (!(p.learning_rate >= 0.0)) throw InvalidParams("learning_rate must be >= 0");
  if (!(p.subsample > 0.0 && p.subsample <= 1.0))
    throw InvalidParams("subsample must lie in (0,1]");
  if (!(p.colsample_bytree > 0.0 && p.colsample_bytree <= 1.0))
    throw InvalidParams("colsample_bytree must lie in (0,1]");
  if (p.gamma < 0.0 || p.lambda < 0.0)
    throw InvalidParams("gamma and lambda must be >= 0");
  return p;
}

nlohmann::json GbtParams::to_json() const {
  return {{"n_estimators", n_estimators},
          {"max_depth", max_depth},
          {"learning_rate", learning_rate},
          {"subsample", subsample},
          {"colsample_bytree", colsample_bytree},
          {"gamma", gamma},
          {"lambda", lambda}};
}

namespace {

// Per-round tree builder over presorted, subsample-filtered feature orders.
struct BoostContext {
  const Matrix& x;
  const std::vector<double>& g;  // gradient per row (h = 1 for every row)
  const GbtParams& params;
  std::vector<int> cols;                 // sampled feature indices, ascending
  std::vector<std::vector<int>> orders;  // per sampled col, rows sorted by value
  std::vector<int> scratch;
  Tree tree;
};

struct GbtSplit {
  bool found = false;
  int feature = -1;  // index into ctx.cols
  double threshold = 0.0;
  double gain = 0.0;
};

int grow(BoostContext& ctx, std::size_t begin, std::size_t end, int depth) {
  double g_total = 0.0;
  for (std::size_t pos = begin; pos < end; ++pos)
    g_total += ctx.g[static_cast<std::size_t>(ctx.orders[0][pos])];
  const double h_total = static_cast<double>(end - begin);
  const double lambda = ctx.params.lambda;

  auto make_leaf = [&]() {
    const int idx = static_cast<int>(ctx.tree.nodes.size());
    ctx.tree.nodes.emplace_back();
    ctx.tree.nodes.back().leaf = {-g_total / (h_total + lambda)};
    return idx;
  };

  if (depth >= ctx.params.max_depth || end - begin < 2) return make_leaf();

  const double parent_term = g_total * g_total / (h_total + lambda);
  GbtSplit best;
  for (std::size_t ci = 0; ci < ctx.cols.size(); ++ci) {
    const auto col = static_cast<std::size_t>(ctx.cols[ci]);
    const auto& order = ctx.orders[ci];
    double gl = 0.0;
    for (std::size_t pos = begin; pos + 1 < end; ++pos) {
      const auto row = static_cast<std::size_t>(order[pos]);
      gl += ctx.g[row];
      const double xv = ctx.x(row, col);
      const double xn = ctx.x(static_cast<std::size_t>(order[pos + 1]), col);
      if (xv == xn) continue;
      const double hl = static_cast<double>(pos - begin + 1);
      const double hr = h_total - hl;
      const double gr = g_total - gl;
      const double gain = 0.5 * (gl * gl / (hl + lambda) + gr * gr / (hr + lambda) -
                                 parent_term) -
                          ctx.params.gamma;
      // only strictly positive gains split; ties keep the first candidate
      // (lowest feature index, then lowest threshold)
      if (gain > best.gain) {
        best.found = true;
        best.feature = static_cast<int>(ci);
        best.threshold = xv + 0.5 * (xn - xv);
        best.gain = gain;
      }
    }
  }

  if (!best.found) return make_leaf();

  const auto split_col = static_cast<std::size_t>(ctx.cols[static_cast<std::size_t>(best.feature)]);
  const double thr = best.threshold;
  std::size_t left_count = 0;
  for (auto& order : ctx.orders) {
    ctx.scratch.clear();
    std::size_t out = begin;
    for (std::size_t pos = begin; pos < end; ++pos) {
      const int row = order[pos];
      if (ctx.x(static_cast<std::size_t>(row), split_col) <= thr)
        order[out++] = row;
      else
        ctx.scratch.push_back(row);
    }
    left_count = out - begin;
    std::copy(ctx.scratch.begin(), ctx.scratch.end(),
              order.begin() + static_cast<std::ptrdiff_t>(out));
  }

  const int idx = static_cast<int>(ctx.tree.nodes.size());
  ctx.tree.nodes.emplace_back();
  ctx.tree.nodes[static_cast<std::size_t>(idx)].feature =
      static_cast<int>(split_col);
  ctx.tree.nodes[static_cast<std::size_t>(idx)].threshold = thr;
  const int l = grow(ctx, begin, begin + left_count, depth + 1);
  const int r = grow(ctx, begin + left_count, end, depth + 1);
  ctx.tree.nodes[static_cast<std::size_t>(idx)].left = l;
  ctx.tree.nodes[static_cast<std::size_t>(idx)].right = r;
  return idx;
}

}  // namespace

void GradientBoostedTrees::fit(const Matrix& x, const Matrix& y,
                               std::uint64_t seed) {
  const std::size_t n = x.rows(), d = x.cols();
  if (n == 0 || d == 0) throw EmptyData("boosting needs data");
  if (y.cols() != 1)
    throw TargetCountMismatch(
        "boosted trees are single-target; wrap for multi-output");
  seed_ = seed;
  trees_.clear();
  training_loss_.clear();

  double mean = 0.0;
  for (std::size_t i = 0; i < n; ++i) mean += y(i, 0);
  base_score_ = mean / static_cast<double>(n);

  // score of every training row, updated after each round
  std::vector<double> f(n, base_score_);

  // presorted row order per feature, shared across rounds
  std::vector<std::vector<int>> global_order(d);
  for (std::size_t c = 0; c < d; ++c) {
    auto& ord = global_order[c];
    ord.resize(n);
    std::iota(ord.begin(), ord.end(), 0);
    std::stable_sort(ord.begin(), ord.end(), [&](int a, int b) {
      return x(static_cast<std::size_t>(a), c) < x(static_cast<std::size_t>(b), c);
    });
  }

  const auto n_sub = std::max<std::size_t>(
      1, static_cast<std::size_t>(params_.subsample * static_cast<double>(n)));
  const auto n_cols = std::max<std::size_t>(
      1, static_cast<std::size_t>(params_.colsample_bytree *
                                  static_cast<double>(d)));

  std::vector<double> g(n);
  std::vector<char> in_sample(n);
  for (int round = 0; round < params_.n_estimators; ++round) {
    Rng rng(derive_seed(seed, fnv1a64("gbt_round"),
                        static_cast<std::uint64_t>(round)));

    for (std::size_t i = 0; i < n; ++i) g[i] = f[i] - y(i, 0);

    std::fill(in_sample.begin(), in_sample.end(), 1);
    if (n_sub < n) {
      std::fill(in_sample.begin(), in_sample.end(), 0);
      for (auto i : rng.sample_without_replacement(n, n_sub)) in_sample[i] = 1;
    }

    BoostContext ctx{x, g, params_, {}, {}, {}, {}};
    ctx.tree.n_features = d;
    if (n_cols < d) {
      for (auto c : rng.sample_without_replacement(d, n_cols))
        ctx.cols.push_back(static_cast<int>(c));
    } else {
      ctx.cols.resize(d);
      std::iota(ctx.cols.begin(), ctx.cols.end(), 0);
    }

    ctx.orders.resize(ctx.cols.size());
    for (std::size_t ci = 0; ci < ctx.cols.size(); ++ci) {
      const auto& src = global_order[static_cast<std::size_t>(ctx.cols[ci])];
      auto& dst = ctx.orders[ci];
      dst.reserve(n_sub);
      for (int row : src)
        if (in_sample[static_cast<std::size_t>(row)]) dst.push_back(row);
    }
    ctx.scratch.reserve(n_sub);

    grow(ctx, 0, ctx.orders[0].size(), 0);
    trees_.push_back(std::move(ctx.tree));

    // every row, in-sample or not, receives the shrunken tree update
    const Tree& tree = trees_.back();
    double sse = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      f[i] += params_.learning_rate * tree.route(x.row(i)).leaf[0];
      const double r = f[i] - y(i, 0);
      sse += r * r;
    }
    training_loss_.push_back(sse / static_cast<double>(n));
  }
}

Matrix GradientBoostedTrees::predict(const Matrix& x) const {
  if (trees_.empty()) throw InvalidParams("predict before fit");
  Matrix out(x.rows(), 1);
  for (std::size_t r = 0; r < x.rows(); ++r) {
    double v = base_score_;
    for (const Tree& t : trees_)
      v += params_.learning_rate * t.route(x.row(r)).leaf[0];
    out(r, 0) = v;
  }
  return out;
}

nlohmann::json GradientBoostedTrees::to_json() const {
  nlohmann::json trees = nlohmann::json::array();
  for (const Tree& t : trees_) trees.push_back(t.to_json());
  return {{"model", "gradient_boosted_trees"},
          {"params", params_.to_json()},
          {"seed", seed_},
          {"base_score", base_score_},
          {"trees", std::move(trees)}};
}

GradientBoostedTrees GradientBoostedTrees::from_json(const nlohmann::json& j) {
  GradientBoostedTrees gbt(GbtParams::from_config(j.at("params")));
  gbt.seed_ = j.at("seed").get<std::uint64_t>();
  gbt.base_score_ = j.at("base_score").get<double>();
  for (const auto& tj : j.at("trees")) gbt.trees_.push_back(Tree::from_json(tj));
  return gbt;
}

}  // namespace wxbench
