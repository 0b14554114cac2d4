#include <doctest.h>

#include <cmath>
#include <limits>
#include <set>

#include "wxbench/cv.hpp"
#include "wxbench/errors.hpp"
#include "wxbench/rng.hpp"

using namespace wxbench;

TEST_CASE("time_series_folds exact enumeration for n=12, k=5") {
  const auto folds = time_series_folds(12, 5);
  REQUIRE(folds.size() == 5);
  const std::size_t want[5][4] = {
      {0, 2, 2, 4}, {0, 4, 4, 6}, {0, 6, 6, 8}, {0, 8, 8, 10}, {0, 10, 10, 12}};
  for (std::size_t i = 0; i < 5; ++i) {
    CHECK(folds[i].train_begin == want[i][0]);
    CHECK(folds[i].train_end == want[i][1]);
    CHECK(folds[i].test_begin == want[i][2]);
    CHECK(folds[i].test_end == want[i][3]);
  }
}

TEST_CASE("time_series_folds rejects too-small n") {
  CHECK_THROWS_AS(time_series_folds(6, 5), TooFewSamples);
  CHECK_THROWS_AS(time_series_folds(11, 5), TooFewSamples);
  CHECK_NOTHROW(time_series_folds(12, 5));
}

TEST_CASE("folds satisfy ordering and expanding-window structure") {
  Rng rng(31);
  for (int rep = 0; rep < 200; ++rep) {
    const int k = 2 + static_cast<int>(rng.uniform_int(8));
    const std::size_t n =
        2 * (static_cast<std::size_t>(k) + 1) + rng.uniform_int(500);
    const auto folds = time_series_folds(n, k);
    REQUIRE(folds.size() == static_cast<std::size_t>(k));
    std::size_t prev_train = 0;
    for (std::size_t i = 0; i < folds.size(); ++i) {
      const auto& f = folds[i];
      CHECK(f.train_begin == 0);
      CHECK(f.train_end == f.test_begin);   // max(train) < min(test)
      CHECK(f.test_begin < f.test_end);
      CHECK(f.test_end <= n);
      CHECK(f.train_end > 0);
      if (i > 0) CHECK(f.train_end > prev_train);  // strictly expanding
      prev_train = f.train_end;
    }
    CHECK(folds.back().test_end == n);
  }
}

TEST_CASE("seed plan gives distinct seeds per (config, fold)") {
  const SeedPlan plan{42};
  std::set<std::uint64_t> seen;
  for (std::size_t c = 0; c < 50; ++c)
    for (std::size_t f = 0; f < 5; ++f)
      seen.insert(plan.run_seed("xgb", c, f));
  CHECK(seen.size() == 250);
  CHECK(plan.run_seed("xgb", 0, 0) != plan.run_seed("svr", 0, 0));
  // reproducible
  CHECK(plan.run_seed("dt", 3, 1) == SeedPlan{42}.run_seed("dt", 3, 1));
}

TEST_CASE("hypergrid enumerates the cartesian product in sorted-key order") {
  HyperGrid g;
  g.set("b", {1, 2});
  g.set("a", {10, 20, 30});
  CHECK(g.config_count() == 6);
  const auto configs = g.enumerate();
  // "a" sorts first, so it varies slowest; "b" cycles fastest
  CHECK(configs[0]["a"] == 10);
  CHECK(configs[0]["b"] == 1);
  CHECK(configs[1]["a"] == 10);
  CHECK(configs[1]["b"] == 2);
  CHECK(configs[2]["a"] == 20);
  CHECK(configs[5]["a"] == 30);
  CHECK(configs[5]["b"] == 2);
}

namespace {

// deterministic synthetic scorer: quadratic bowl over two parameters
double bowl_score(const ModelConfig& cfg) {
  const double a = cfg.at("a").get<double>();
  const double b = cfg.at("b").get<double>();
  return (a - 2.0) * (a - 2.0) + 0.5 * (b - 1.0) * (b - 1.0);
}

}  // namespace

TEST_CASE("grid_search picks the minimum mean score and keeps a full table") {
  HyperGrid g;
  g.set("a", {1.0, 2.0, 3.0});
  g.set("b", {0.0, 1.0});
  const SeedPlan seeds{42};
  const CvScheme cv{5};
  const auto res = grid_search(
      "toy", g, 40, cv, seeds,
      [](const ModelConfig& cfg, const FoldRange&, std::uint64_t) {
        return bowl_score(cfg);
      },
      1);
  CHECK(res.best_config["a"] == 2.0);
  CHECK(res.best_config["b"] == 1.0);
  CHECK(res.table.size() == 6 * 5);
  CHECK(res.mean_scores.size() == 6);
  CHECK(res.best_score == doctest::Approx(0.0));
}

TEST_CASE("grid_search singleton grid returns the only config") {
  HyperGrid g;
  g.set("x", {7});
  const auto res = grid_search(
      "toy", g, 20, CvScheme{5}, SeedPlan{1},
      [](const ModelConfig&, const FoldRange&, std::uint64_t) { return 1.0; },
      1);
  CHECK(res.best_config["x"] == 7);
  CHECK(res.best_index == 0);
}

TEST_CASE("grid_search tie goes to the earliest enumerated config") {
  HyperGrid g;
  g.set("x", {5, 6, 7});
  const auto res = grid_search(
      "toy", g, 20, CvScheme{5}, SeedPlan{1},
      [](const ModelConfig&, const FoldRange&, std::uint64_t) { return 3.0; },
      2);
  CHECK(res.best_index == 0);
  CHECK(res.best_config["x"] == 5);
}

TEST_CASE("grid_search records failed cells as +inf and keeps going") {
  HyperGrid g;
  g.set("x", {1, 2});
  const auto res = grid_search(
      "toy", g, 20, CvScheme{5}, SeedPlan{1},
      [](const ModelConfig& cfg, const FoldRange&, std::uint64_t) -> double {
        if (cfg.at("x").get<int>() == 1) throw std::runtime_error("boom");
        return 2.0;
      },
      2);
  CHECK(res.best_config["x"] == 2);
  bool saw_inf = false;
  for (const auto& row : res.table)
    if (std::isinf(row.rmse_avg)) saw_inf = true;
  CHECK(saw_inf);
  CHECK(std::isinf(res.mean_scores[0]));
}

TEST_CASE("grid_search rejects an empty grid") {
  HyperGrid g;
  CHECK_THROWS_AS(
      grid_search("toy", g, 20, CvScheme{5}, SeedPlan{1},
                  [](const ModelConfig&, const FoldRange&, std::uint64_t) {
                    return 0.0;
                  },
                  1),
      EmptyGrid);
}

TEST_CASE("grid_search is deterministic across parallelism degrees") {
  HyperGrid g;
  g.set("a", {1.0, 2.0, 3.0, 4.0});
  g.set("b", {0.0, 0.5, 1.0});
  // score depends on the derived seed so scheduling bugs would show up
  const auto scorer = [](const ModelConfig& cfg, const FoldRange& f,
                         std::uint64_t seed) {
    Rng rng(seed);
    return bowl_score(cfg) + 1e-6 * rng.uniform() +
           1e-9 * static_cast<double>(f.test_begin);
  };
  const auto serial = grid_search("toy", g, 60, CvScheme{5}, SeedPlan{9},
                                  scorer, 1);
  const auto parallel = grid_search("toy", g, 60, CvScheme{5}, SeedPlan{9},
                                    scorer, 4);
  CHECK(serial.best_index == parallel.best_index);
  REQUIRE(serial.table.size() == parallel.table.size());
  for (std::size_t i = 0; i < serial.table.size(); ++i)
    CHECK(serial.table[i].rmse_avg == parallel.table[i].rmse_avg);
}
