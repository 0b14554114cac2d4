#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "wxbench/model.hpp"

namespace wxbench {

// Expanding-window fold over [0, n): train on a prefix, test on the next
// contiguous block. Half-open index ranges.
struct FoldRange {
  std::size_t train_begin = 0;
  std::size_t train_end = 0;
  std::size_t test_begin = 0;
  std::size_t test_end = 0;
};

struct CvScheme {
  int k = 5;
};

// test_size = ⌊n/(k+1)⌋; fold i in {1..k} tests on
// [n-(k-i+1)*test_size, n-(k-i)*test_size) and trains on everything before.
// Requires n >= 2(k+1) so no fold degenerates.
std::vector<FoldRange> time_series_folds(std::size_t n, int k);

// Deterministic per-task seed derivation.
struct SeedPlan {
  std::uint64_t base_seed = 42;

  std::uint64_t run_seed(const std::string& family, std::size_t config_index,
                         std::size_t fold_index) const;
};

struct ScoreRow {
  std::size_t config_index = 0;
  std::string config_json;
  int fold = 0;          // 1-based
  double rmse_avg = 0.0; // +inf marks a failed cell
};

struct GridSearchResult {
  ModelConfig best_config;
  std::size_t best_index = 0;
  double best_score = 0.0;  // mean fold score of the winner
  std::vector<ScoreRow> table;
  std::vector<double> mean_scores;  // per config
};

// Scores one (config, fold) cell: fit on the fold's train range, evaluate on
// its test range, return the two-target average RMSE. Exceptions thrown here
// are swallowed by the engine: the cell scores +inf.
using CellScorer = std::function<double(const ModelConfig& config,
                                        const FoldRange& fold,
                                        std::uint64_t seed)>;

// Evaluates every (config, fold) cell, in parallel up to `jobs` threads.
// Results are deterministic regardless of scheduling: each cell derives its
// own seed and writes only its own slot; ties on the mean score go to the
// earliest config in enumeration order.
GridSearchResult grid_search(const std::string& family, const HyperGrid& grid,
                             std::size_t n_train_samples, const CvScheme& cv,
                             const SeedPlan& seeds, const CellScorer& scorer,
                             int jobs = 1);

}  // namespace wxbench
