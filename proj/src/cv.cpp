#include "wxbench/cv.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <thread>

#include "wxbench/errors.hpp"
#include "wxbench/rng.hpp"

namespace wxbench {

std::vector<FoldRange> time_series_folds(std::size_t n, int k) {
  if (k < 2) throw InvalidParams("fold count must be >= 2");
  const auto ku = static_cast<std::size_t>(k);
  if (n < 2 * (ku + 1))
    throw TooFewSamples("need at least " + std::to_string(2 * (ku + 1)) +
                        " samples for " + std::to_string(k) + " folds, got " +
                        std::to_string(n));
  const std::size_t test_size = n / (ku + 1);
  std::vector<FoldRange> folds;
  folds.reserve(ku);
  for (std::size_t i = 1; i <= ku; ++i) {
    FoldRange f;
    f.test_begin = n - (ku - i + 1) * test_size;
    f.test_end = n - (ku - i) * test_size;
    f.train_begin = 0;
    f.train_end = f.test_begin;
    folds.push_back(f);
  }
  return folds;
}

std::uint64_t SeedPlan::run_seed(const std::string& family,
                                 std::size_t config_index,
                                 std::size_t fold_index) const {
  return derive_seed(base_seed, fnv1a64(family), config_index, fold_index);
}

GridSearchResult grid_search(const std::string& family, const HyperGrid& grid,
                             std::size_t n_train_samples, const CvScheme& cv,
                             const SeedPlan& seeds, const CellScorer& scorer,
                             int jobs) {
  if (grid.empty()) throw EmptyGrid("hyperparameter grid for " + family);
  const auto folds = time_series_folds(n_train_samples, cv.k);
  const std::size_t n_configs = grid.config_count();
  const std::size_t n_cells = n_configs * folds.size();
  const auto configs = grid.enumerate();

  std::vector<double> cell_scores(n_cells,
                                  std::numeric_limits<double>::infinity());

  auto run_cell = [&](std::size_t cell) {
    const std::size_t ci = cell / folds.size();
    const std::size_t fi = cell % folds.size();
    const std::uint64_t seed = seeds.run_seed(family, ci, fi);
    double score = std::numeric_limits<double>::infinity();
    try {
      score = scorer(configs[ci], folds[fi], seed);
      if (!std::isfinite(score))
        score = std::numeric_limits<double>::infinity();
    } catch (const std::exception&) {
      // failed cell: keep +inf, the search goes on
    }
    cell_scores[cell] = score;
  };

  const int workers = std::max(1, jobs);
  if (workers == 1 || n_cells <= 1) {
    for (std::size_t c = 0; c < n_cells; ++c) run_cell(c);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    const auto nthreads =
        std::min<std::size_t>(static_cast<std::size_t>(workers), n_cells);
    pool.reserve(nthreads);
    for (std::size_t t = 0; t < nthreads; ++t) {
      pool.emplace_back([&] {
        while (true) {
          const std::size_t cell = next.fetch_add(1);
          if (cell >= n_cells) break;
          run_cell(cell);
        }
      });
    }
    for (auto& th : pool) th.join();
  }

  GridSearchResult res;
  res.table.reserve(n_cells);
  res.mean_scores.assign(n_configs, 0.0);
  for (std::size_t ci = 0; ci < n_configs; ++ci) {
    const std::string cfg_json = configs[ci].dump();
    double sum = 0.0;
    for (std::size_t fi = 0; fi < folds.size(); ++fi) {
      const double s = cell_scores[ci * folds.size() + fi];
      sum += s;
      res.table.push_back({ci, cfg_json, static_cast<int>(fi) + 1, s});
    }
    res.mean_scores[ci] = sum / static_cast<double>(folds.size());
  }

  std::size_t best = 0;
  for (std::size_t ci = 1; ci < n_configs; ++ci)
    if (res.mean_scores[ci] < res.mean_scores[best]) best = ci;
  res.best_index = best;
  res.best_config = configs[best];
  res.best_score = res.mean_scores[best];
  return res;
}

}  // namespace wxbench
