#include "wxbench/tree.hpp"

#include <algorithm>
#include <cmath>

#include "wxbench/errors.hpp"

namespace wxbench {

const TreeNode& Tree::route(std::span<const double> row) const {
  const TreeNode* node = &nodes[0];
  while (node->feature >= 0) {
    node = row[static_cast<std::size_t>(node->feature)] <= node->threshold
               ? &nodes[static_cast<std::size_t>(node->left)]
               : &nodes[static_cast<std::size_t>(node->right)];
  }
  return *node;
}

Matrix Tree::predict(const Matrix& x, std::size_t n_targets) const {
  if (x.cols() != n_features)
    throw FeatureCountMismatch("tree fitted on " + std::to_string(n_features) +
                               " features, got " + std::to_string(x.cols()));
  Matrix out(x.rows(), n_targets);
  for (std::size_t r = 0; r < x.rows(); ++r) {
    const TreeNode& leaf = route(x.row(r));
    for (std::size_t t = 0; t < n_targets; ++t) out(r, t) = leaf.leaf[t];
  }
  return out;
}

namespace {

nlohmann::json node_to_json(const Tree& tree, int idx) {
  const TreeNode& n = tree.nodes[static_cast<std::size_t>(idx)];
  if (n.feature < 0) return nlohmann::json{{"leaf", n.leaf}};
  return nlohmann::json{{"feature", n.feature},
                        {"threshold", n.threshold},
                        {"left", node_to_json(tree, n.left)},
                        {"right", node_to_json(tree, n.right)}};
}

int node_from_json(const nlohmann::json& j, Tree& tree) {
  const int idx = static_cast<int>(tree.nodes.size());
  tree.nodes.emplace_back();
  if (j.contains("leaf")) {
    tree.nodes[static_cast<std::size_t>(idx)].leaf =
        j.at("leaf").get<std::vector<double>>();
    return idx;
  }
  tree.nodes[static_cast<std::size_t>(idx)].feature = j.at("feature").get<int>();
  tree.nodes[static_cast<std::size_t>(idx)].threshold =
      j.at("threshold").get<double>();
  const int l = node_from_json(j.at("left"), tree);
  const int r = node_from_json(j.at("right"), tree);
  tree.nodes[static_cast<std::size_t>(idx)].left = l;
  tree.nodes[static_cast<std::size_t>(idx)].right = r;
  return idx;
}

}  // namespace

nlohmann::json Tree::to_json() const {
  return nlohmann::json{{"n_features", n_features},
                        {"root", node_to_json(*this, 0)}};
}

Tree Tree::from_json(const nlohmann::json& j) {
  Tree t;
  t.n_features = j.at("n_features").get<std::size_t>();
  node_from_json(j.at("root"), t);
  return t;
}

DtParams DtParams::from_config(const ModelConfig& cfg) {
  DtParams p;
  if (cfg.contains("max_depth")) {
    p.max_depth = cfg["max_depth"].is_null() ? -1 : cfg["max_depth"].get<int>();
    if (p.max_depth == 0 || p.max_depth < -1)
      throw InvalidParams("max_depth must be >= 1 or null");
  }
  if (cfg.contains("min_samples_leaf")) {
    p.min_samples_leaf = cfg["min_samples_leaf"].get<int>();
    if (p.min_samples_leaf < 1)
      throw InvalidParams("min_samples_leaf must be >= 1");
  }
  if (cfg.contains("criterion")) {
    const auto c = cfg["criterion"].get<std::string>();
    if (c == "squared_error")
      p.criterion = Criterion::squared_error;
    else if (c == "friedman_mse")
      p.criterion = Criterion::friedman_mse;
    else
      throw InvalidParams("unknown criterion '" + c + "'");
  }
  if (cfg.contains("max_features")) {
    const auto& mf = cfg["max_features"];
    if (mf.is_string()) {
      const auto s = mf.get<std::string>();
      if (s == "sqrt")
        p.feature_mode = FeatureMode::sqrt_mode;
      else if (s == "log2")
        p.feature_mode = FeatureMode::log2_mode;
      else if (s == "all")
        p.feature_mode = FeatureMode::all;
      else
        throw InvalidParams("unknown max_features '" + s + "'");
    } else if (mf.is_null()) {
      p.feature_mode = FeatureMode::all;
    } else {
      p.feature_mode = FeatureMode::fraction;
      p.feature_fraction = mf.get<double>();
      if (!(p.feature_fraction > 0.0 && p.feature_fraction <= 1.0))
        throw InvalidParams("max_features fraction must lie in (0,1]");
    }
  }
  return p;
}

nlohmann::json DtParams::to_json() const {
  nlohmann::json j;
  j["max_depth"] = max_depth < 0 ? nlohmann::json() : nlohmann::json(max_depth);
  j["min_samples_leaf"] = min_samples_leaf;
  j["criterion"] = criterion == Criterion::squared_error ? "squared_error"
                                                         : "friedman_mse";
  switch (feature_mode) {
    case FeatureMode::all: j["max_features"] = "all"; break;
    case FeatureMode::sqrt_mode: j["max_features"] = "sqrt"; break;
    case FeatureMode::log2_mode: j["max_features"] = "log2"; break;
    case FeatureMode::fraction: j["max_features"] = feature_fraction; break;
  }
  return j;
}

namespace {

// Growth state shared across nodes: one index array per feature holding the
// active rows sorted by that feature's value. Splits stable-partition every
// array so sortedness is preserved without re-sorting.
struct GrowContext {
  const Matrix& x;
  const Matrix& y;
  const std::vector<double>& w;
  const DtParams& params;
  Rng& rng;
  std::size_t n_targets;
  std::size_t subset_size;
  std::vector<std::vector<int>> orders;  // [feature][position] = row
  std::vector<int> scratch;
  Tree tree;
};

struct BestSplit {
  bool found = false;
  int feature = -1;
  double threshold = 0.0;
  double score = 0.0;
};

// Scans one feature's sorted segment for the best split. Candidates sit at
// midpoints between consecutive distinct values; both sides must carry at
// least min_samples_leaf weight. Target values arrive centered on the node
// mean so a constant node yields exact zero scores everywhere.
void scan_feature(const GrowContext& ctx, int feature, std::size_t begin,
                  std::size_t end, double total_w,
                  std::span<const double> node_mean,
                  std::span<const double> total_cs2, BestSplit& best) {
  const auto& order = ctx.orders[static_cast<std::size_t>(feature)];
  const std::size_t m = ctx.n_targets;
  const double msl = static_cast<double>(ctx.params.min_samples_leaf);
  const bool squared = ctx.params.criterion == DtParams::Criterion::squared_error;

  double wl = 0.0;
  double cs1l[2] = {0.0, 0.0};
  double cs2l[2] = {0.0, 0.0};

  for (std::size_t pos = begin; pos + 1 < end; ++pos) {
    const auto row = static_cast<std::size_t>(order[pos]);
    const double rw = ctx.w[row];
    wl += rw;
    for (std::size_t t = 0; t < m; ++t) {
      const double v = ctx.y(row, t) - node_mean[t];
      cs1l[t] += rw * v;
      cs2l[t] += rw * v * v;
    }
    const double xv = ctx.x(row, static_cast<std::size_t>(feature));
    const double xn = ctx.x(static_cast<std::size_t>(order[pos + 1]),
                            static_cast<std::size_t>(feature));
    if (xv == xn) continue;  // not a boundary between distinct values

    const double wr = total_w - wl;
    if (wl < msl || wr < msl) continue;

    double score = 0.0;
    if (squared) {
      // variance reduction: Imp(parent) - (wl*Imp_L + wr*Imp_R)/w, averaged
      // over targets; equals (SSE_parent - SSE_L - SSE_R)/(w*m) in exact
      // arithmetic
      for (std::size_t t = 0; t < m; ++t) {
        const double cs1r = -cs1l[t];  // centered sums cancel at the node
        const double cs2r = total_cs2[t] - cs2l[t];
        const double sse_l = std::max(0.0, cs2l[t] - cs1l[t] * cs1l[t] / wl);
        const double sse_r = std::max(0.0, cs2r - cs1r * cs1r / wr);
        score += total_cs2[t] - sse_l - sse_r;
      }
      score /= total_w * static_cast<double>(m);
    } else {
      // friedman improvement: wl*wr/(wl+wr) * (mean_L - mean_R)^2
      for (std::size_t t = 0; t < m; ++t) {
        const double diff = cs1l[t] / wl - (-cs1l[t]) / wr;
        score += (wl * wr / (wl + wr)) * diff * diff;
      }
      score /= static_cast<double>(m);
    }

    if (score > best.score) {
      best.found = true;
      best.feature = feature;
      best.threshold = xv + 0.5 * (xn - xv);
      best.score = score;
    }
  }
}

std::size_t feature_subset_size(const DtParams& p, std::size_t d) {
  switch (p.feature_mode) {
    case DtParams::FeatureMode::all:
      return d;
    case DtParams::FeatureMode::sqrt_mode:
      return std::max<std::size_t>(
          1, static_cast<std::size_t>(std::sqrt(static_cast<double>(d))));
    case DtParams::FeatureMode::log2_mode:
      return std::max<std::size_t>(
          1, static_cast<std::size_t>(std::log2(static_cast<double>(d))));
    case DtParams::FeatureMode::fraction:
      return std::max<std::size_t>(
          1, static_cast<std::size_t>(p.feature_fraction *
                                      static_cast<double>(d)));
  }
  return d;
}

int grow(GrowContext& ctx, std::size_t begin, std::size_t end, int depth) {
  const std::size_t m = ctx.n_targets;
  const std::size_t d = ctx.x.cols();

  double total_w = 0.0;
  double mean[2] = {0.0, 0.0};
  for (std::size_t pos = begin; pos < end; ++pos) {
    const auto row = static_cast<std::size_t>(ctx.orders[0][pos]);
    const double rw = ctx.w[row];
    total_w += rw;
    for (std::size_t t = 0; t < m; ++t) mean[t] += rw * ctx.y(row, t);
  }
  for (std::size_t t = 0; t < m; ++t) mean[t] /= total_w;

  auto make_leaf = [&]() {
    const int idx = static_cast<int>(ctx.tree.nodes.size());
    ctx.tree.nodes.emplace_back();
    ctx.tree.nodes.back().leaf.assign(mean, mean + m);
    return idx;
  };

  const bool depth_ok = ctx.params.max_depth < 0 || depth < ctx.params.max_depth;
  if (!depth_ok || end - begin < 2 ||
      total_w < 2.0 * static_cast<double>(ctx.params.min_samples_leaf))
    return make_leaf();

  // centered second moments (per-target SSE of the node)
  double cs2[2] = {0.0, 0.0};
  for (std::size_t pos = begin; pos < end; ++pos) {
    const auto row = static_cast<std::size_t>(ctx.orders[0][pos]);
    const double rw = ctx.w[row];
    for (std::size_t t = 0; t < m; ++t) {
      const double v = ctx.y(row, t) - mean[t];
      cs2[t] += rw * v * v;
    }
  }

  // feature subset for this node; drawing is skipped entirely when the
  // subset is the full feature set so that fraction=1.0 stays seed-free
  BestSplit best;
  if (ctx.subset_size >= d) {
    for (std::size_t f = 0; f < d; ++f)
      scan_feature(ctx, static_cast<int>(f), begin, end, total_w, {mean, m},
                   {cs2, m}, best);
  } else {
    const auto subset = ctx.rng.sample_without_replacement(d, ctx.subset_size);
    for (auto f : subset)
      scan_feature(ctx, static_cast<int>(f), begin, end, total_w, {mean, m},
                   {cs2, m}, best);
  }

  if (!best.found) return make_leaf();

  // stable partition of every feature order around the chosen split
  const auto goes_left = [&](int row) {
    return ctx.x(static_cast<std::size_t>(row),
                 static_cast<std::size_t>(best.feature)) <= best.threshold;
  };
  std::size_t left_count = 0;
  for (auto& order : ctx.orders) {
    ctx.scratch.clear();
    std::size_t out = begin;
    for (std::size_t pos = begin; pos < end; ++pos) {
      const int row = order[pos];
      if (goes_left(row))
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
  ctx.tree.nodes[static_cast<std::size_t>(idx)].feature = best.feature;
  ctx.tree.nodes[static_cast<std::size_t>(idx)].threshold = best.threshold;
  const int l = grow(ctx, begin, begin + left_count, depth + 1);
  const int r = grow(ctx, begin + left_count, end, depth + 1);
  ctx.tree.nodes[static_cast<std::size_t>(idx)].left = l;
  ctx.tree.nodes[static_cast<std::size_t>(idx)].right = r;
  return idx;
}

}  // namespace

Tree fit_decision_tree(const Matrix& x, const Matrix& y,
                       const std::vector<double>& weights,
                       const DtParams& params, Rng& rng) {
  const std::size_t n = x.rows(), d = x.cols();
  if (n == 0 || d == 0) throw EmptyData("decision tree needs data");
  if (y.rows() != n) throw LengthMismatch("X/Y row mismatch");
  if (y.cols() < 1 || y.cols() > 2)
    throw TargetCountMismatch("decision tree supports 1 or 2 targets");

  GrowContext ctx{x,   y,        weights,
                  params, rng,   y.cols(),
                  feature_subset_size(params, d), {}, {}, {}};
  ctx.tree.n_features = d;

  // active rows (positive weight) sorted per feature
  std::vector<int> active;
  active.reserve(n);
  for (std::size_t i = 0; i < n; ++i)
    if (weights[i] > 0.0) active.push_back(static_cast<int>(i));
  if (active.empty()) throw EmptyData("no rows with positive weight");

  ctx.orders.assign(d, active);
  for (std::size_t f = 0; f < d; ++f) {
    std::stable_sort(ctx.orders[f].begin(), ctx.orders[f].end(),
                     [&](int a, int b) {
                       return x(static_cast<std::size_t>(a), f) <
                              x(static_cast<std::size_t>(b), f);
                     });
  }
  ctx.scratch.reserve(active.size());

  grow(ctx, 0, active.size(), 0);
  return std::move(ctx.tree);
}

void DecisionTree::fit(const Matrix& x, const Matrix& y, std::uint64_t seed) {
  seed_ = seed;
  n_targets_ = y.cols();
  Rng rng(derive_seed(seed, fnv1a64("dt")));
  std::vector<double> w(x.rows(), 1.0);
  tree_ = fit_decision_tree(x, y, w, params_, rng);
}

Matrix DecisionTree::predict(const Matrix& x) const {
  if (tree_.empty()) throw InvalidParams("predict before fit");
  return tree_.predict(x, n_targets_);
}

nlohmann::json DecisionTree::to_json() const {
  return nlohmann::json{{"model", "decision_tree"},
                        {"params", params_.to_json()},
                        {"seed", seed_},
                        {"n_targets", n_targets_},
                        {"tree", tree_.to_json()}};
}

DecisionTree DecisionTree::from_json(const nlohmann::json& j) {
  DecisionTree dt(DtParams::from_config(j.at("params")));
  dt.seed_ = j.at("seed").get<std::uint64_t>();
  dt.n_targets_ = j.at("n_targets").get<std::size_t>();
  dt.tree_ = Tree::from_json(j.at("tree"));
  return dt;
}

}  // namespace wxbench
