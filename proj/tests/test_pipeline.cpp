#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "wxbench/benchmark.hpp"
#include "wxbench/csv.hpp"
#include "wxbench/stats.hpp"
#include "wxbench/tree.hpp"
#include "wxbench/errors.hpp"
#include "wxbench/rng.hpp"
#include "wxbench/synth.hpp"

using namespace wxbench;
namespace fs = std::filesystem;

namespace {

// train-mean baseline; fits one value per target
class MeanModel : public TabularModel {
 public:
  void fit(const Matrix&, const Matrix& y, std::uint64_t) override {
    means_.assign(y.cols(), 0.0);
    for (std::size_t r = 0; r < y.rows(); ++r)
      for (std::size_t c = 0; c < y.cols(); ++c) means_[c] += y(r, c);
    for (auto& m : means_) m /= static_cast<double>(y.rows());
  }
  Matrix predict(const Matrix& x) const override {
    Matrix out(x.rows(), means_.size());
    for (std::size_t r = 0; r < x.rows(); ++r)
      for (std::size_t c = 0; c < means_.size(); ++c) out(r, c) = means_[c];
    return out;
  }
  nlohmann::json to_json() const override { return {{"model", "mean"}}; }

 private:
  std::vector<double> means_;
};

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag) {
    path = fs::temp_directory_path() / ("wxbench_" + tag);
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  REQUIRE(in.good());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace

TEST_CASE("multi-output wrapper: mean baseline per target") {
  Matrix x(10, 1);
  Matrix y(10, 2);
  for (std::size_t r = 0; r < 10; ++r) {
    x(r, 0) = static_cast<double>(r);
    y(r, 0) = 10.0;
    y(r, 1) = 80.0;
  }
  MultiOutputWrapper wrapper(
      [](const ModelConfig&) -> std::unique_ptr<TabularModel> {
        return std::make_unique<MeanModel>();
      },
      ModelConfig::object());
  wrapper.fit(x, y, 0);
  const Matrix p = wrapper.predict(x);
  for (std::size_t r = 0; r < 10; ++r) {
    CHECK(p(r, 0) == 10.0);
    CHECK(p(r, 1) == 80.0);
  }
}

TEST_CASE("wrapper on a single column equals the base model") {
  Rng rng(101);
  Matrix x(12, 2), y(12, 1);
  for (std::size_t r = 0; r < 12; ++r) {
    x(r, 0) = rng.normal();
    x(r, 1) = rng.normal();
    y(r, 0) = rng.normal();
  }
  MultiOutputWrapper wrapper(
      [](const ModelConfig&) -> std::unique_ptr<TabularModel> {
        return std::make_unique<MeanModel>();
      },
      ModelConfig::object());
  wrapper.fit(x, y, 5);
  MeanModel base;
  base.fit(x, y, MultiOutputWrapper::target_seed(5, 0));
  const Matrix pw = wrapper.predict(x), pb = base.predict(x);
  for (std::size_t r = 0; r < 12; ++r) CHECK(pw(r, 0) == pb(r, 0));
}

TEST_CASE("wrapper permutes outputs with target columns") {
  Rng rng(102);
  Matrix x(15, 2), y(15, 2), y_swapped(15, 2);
  for (std::size_t r = 0; r < 15; ++r) {
    x(r, 0) = rng.normal();
    x(r, 1) = rng.normal();
    y(r, 0) = rng.normal();
    y(r, 1) = rng.normal() + 5.0;
    y_swapped(r, 0) = y(r, 1);
    y_swapped(r, 1) = y(r, 0);
  }
  const auto factory = [](const ModelConfig&) -> std::unique_ptr<TabularModel> {
    return std::make_unique<MeanModel>();
  };
  MultiOutputWrapper a(factory, ModelConfig::object());
  MultiOutputWrapper b(factory, ModelConfig::object());
  a.fit(x, y, 3);
  b.fit(x, y_swapped, 3);
  const Matrix pa = a.predict(x), pb = b.predict(x);
  for (std::size_t r = 0; r < 15; ++r) {
    CHECK(pa(r, 0) == pb(r, 1));
    CHECK(pa(r, 1) == pb(r, 0));
  }
}

TEST_CASE("synth dataset loads, preprocesses and correlates as designed") {
  TempDir dir("synth");
  SynthSpec spec;
  spec.hours = 400;
  csv::atomic_write(dir.path / "w.csv", synth_csv(spec));

  const auto data =
      load_and_preprocess((dir.path / "w.csv").string(), PhysicalBounds::defaults());
  CHECK(data.series.size() == 400);
  CHECK(count_non_hourly_steps(data.series) == 0);
  CHECK(data.outlier_cells == 0);

  // anti-correlation built into the generator
  const auto corr = pearson_correlation(data.series.to_matrix());
  CHECK(corr.r(0, 1) < -0.5);  // temp vs humidity
  CHECK(corr.r(0, 4) < -0.5);  // temp vs pressure
}

TEST_CASE("tabular family driver end-to-end on a small grid") {
  SynthSpec spec;
  spec.hours = 220;
  const auto series = synth_series(spec);
  FeatureSpec fspec;
  fspec.lag_hours = {2, 3};
  fspec.roll_windows = {3};
  const auto fm = assemble_matrix(series, fspec);
  const auto [train, test] = chronological_split(fm, 0.8);

  HyperGrid grid;
  grid.set("max_depth", {2, 6});
  grid.set("min_samples_leaf", {1});
  grid.set("criterion", {"squared_error"});
  grid.set("max_features", {"all"});

  const auto res = run_tabular_family(Family::dt, grid, train, test,
                                      CvScheme{5}, SeedPlan{42}, 2);
  CHECK_FALSE(res.failed);
  CHECK(res.score_table.size() == 2 * 5);
  // deeper tree should win on the diurnal signal
  CHECK(res.best_config["max_depth"] == 6);
  CHECK(res.report.test_temp.rmse > 0.0);
  CHECK(res.test_pred.rows() == test.rows());
  CHECK(res.artifact.payload["model"] == "decision_tree");
}

TEST_CASE("grid-search leakage guard: corrupting fold-test targets does not change the fitted model") {
  SynthSpec spec;
  spec.hours = 150;
  const auto series = synth_series(spec);
  FeatureSpec fspec;
  fspec.lag_hours = {2};
  fspec.roll_windows = {3};
  const auto fm = assemble_matrix(series, fspec);

  const auto folds = time_series_folds(fm.rows(), 5);
  const auto& fold = folds[2];

  // corrupt the targets inside the fold's test block
  FeatureMatrix corrupted = fm;
  Rng rng(103);
  for (std::size_t r = fold.test_begin; r < fold.test_end; ++r) {
    corrupted.y(r, 0) = 1000.0 * rng.normal();
    corrupted.y(r, 1) = 1000.0 * rng.normal();
  }

  DecisionTree a(DtParams{}), b(DtParams{});
  a.fit(fm.x.slice_rows(0, fold.train_end), fm.y.slice_rows(0, fold.train_end),
        7);
  b.fit(corrupted.x.slice_rows(0, fold.train_end),
        corrupted.y.slice_rows(0, fold.train_end), 7);
  const Matrix probe = fm.x.slice_rows(fold.test_begin, fold.test_end);
  const Matrix pa = a.predict(probe), pb = b.predict(probe);
  for (std::size_t r = 0; r < pa.rows(); ++r)
    for (std::size_t c = 0; c < 2; ++c) CHECK(pa(r, c) == pb(r, c));
}

TEST_CASE("run config parsing, overrides and grid overrides") {
  TempDir dir("cfg");
  {
    std::ofstream out(dir.path / "run.conf");
    out << "# comment line\n"
        << "split_ratio = 0.75\n"
        << "models = dt, xgb\n"
        << "seed = 7\n"
        << "bounds.temp = -10,45\n"
        << "features.lags = 2,3\n"
        << "grid.dt.max_depth = 3,null\n"
        << "grid.mlp.hidden_layers = 50,50-50\n";
  }
  RunConfig cfg = load_run_config((dir.path / "run.conf").string());
  CHECK(cfg.split_ratio == 0.75);
  REQUIRE(cfg.models.size() == 2);
  CHECK(cfg.models[0] == Family::dt);
  CHECK(cfg.base_seed == 7);
  CHECK(cfg.bounds.limit(Var::temp).first == -10.0);
  CHECK(cfg.features.lag_hours == std::vector<std::size_t>{2, 3});

  const auto& dt_grid = cfg.grid_overrides.at("dt");
  CHECK(dt_grid.config_count() == 2);
  CHECK(dt_grid.config_at(1)["max_depth"].is_null());
  const auto& mlp_grid = cfg.grid_overrides.at("mlp");
  CHECK(mlp_grid.config_at(1)["hidden_layers"] ==
        nlohmann::json(std::vector<int>{50, 50}));

  apply_config_entry(cfg, "jobs", "3");
  CHECK(cfg.jobs == 3);
  CHECK_THROWS_AS(apply_config_entry(cfg, "bogus_key", "1"), ConfigError);
  CHECK_THROWS_AS(apply_config_entry(cfg, "models", "dt,hal9000"),
                  InvalidParams);
  try {
    apply_config_entry(cfg, "models", "hal9000");
  } catch (const InvalidParams& e) {
    // the error names all valid families
    CHECK(std::string(e.what()).find("svr,mlp,rf,dt,lstm,cnn_lstm,xgb") !=
          std::string::npos);
  }
}

TEST_CASE("default grids have the spec cardinalities") {
  CHECK(default_grid(Family::svr).config_count() == 48);
  CHECK(default_grid(Family::mlp).config_count() == 36);
  CHECK(default_grid(Family::rf).config_count() == 54);
  CHECK(default_grid(Family::dt).config_count() == 72);
  CHECK(default_grid(Family::lstm).config_count() == 4);
  CHECK(default_grid(Family::cnn_lstm).config_count() == 1);
  CHECK(default_grid(Family::xgb).config_count() == 324);
}

TEST_CASE("cmd_analyze writes histograms and a symmetric correlation matrix") {
  TempDir dir("analyze");
  SynthSpec spec;
  spec.hours = 300;
  csv::atomic_write(dir.path / "w.csv", synth_csv(spec));

  RunConfig cfg;
  cfg.data_path = (dir.path / "w.csv").string();
  cfg.out_dir = (dir.path / "out").string();
  cmd_analyze(cfg);

  const fs::path reports = dir.path / "out" / "reports";
  CHECK(fs::exists(reports / "histogram_temp.csv"));
  CHECK(fs::exists(reports / "histogram_humidity.csv"));
  CHECK(fs::exists(reports / "correlation.csv"));

  const auto corr = csv::read_file(reports / "correlation.csv");
  REQUIRE(corr.rows.size() == 7);
  // unit diagonal, symmetric, temp/humidity cell negative
  for (std::size_t i = 0; i < 7; ++i)
    CHECK(std::stod(corr.rows[i][i + 1]) == doctest::Approx(1.0));
  CHECK(std::stod(corr.rows[0][2]) == doctest::Approx(std::stod(corr.rows[1][1])));
  CHECK(std::stod(corr.rows[0][2]) < 0.0);

  const auto hist = csv::read_file(reports / "histogram_temp.csv");
  std::size_t total = 0;
  for (const auto& row : hist.rows) total += std::stoul(row[2]);
  CHECK(total == 300);
}

TEST_CASE("cmd_analyze missing dataset names the path") {
  RunConfig cfg;
  cfg.data_path = "/nonexistent/nowhere.csv";
  try {
    cmd_analyze(cfg);
    FAIL("expected IoError");
  } catch (const IoError& e) {
    CHECK(std::string(e.what()).find("/nonexistent/nowhere.csv") !=
          std::string::npos);
  }
}

TEST_CASE("benchmark + predict + plotdata round trip on small grids") {
  TempDir dir("bench");
  SynthSpec spec;
  spec.hours = 260;
  csv::atomic_write(dir.path / "w.csv", synth_csv(spec));

  RunConfig cfg;
  cfg.data_path = (dir.path / "w.csv").string();
  cfg.out_dir = (dir.path / "out").string();
  cfg.models = {Family::dt, Family::xgb};
  cfg.features.lag_hours = {2, 3};
  cfg.features.roll_windows = {3};
  cfg.jobs = 2;
  apply_config_entry(cfg, "grid.dt.max_depth", "4");
  apply_config_entry(cfg, "grid.dt.min_samples_leaf", "1,2");
  apply_config_entry(cfg, "grid.xgb.n_estimators", "15");
  apply_config_entry(cfg, "grid.xgb.max_depth", "3");
  apply_config_entry(cfg, "grid.xgb.learning_rate", "0.2");
  apply_config_entry(cfg, "grid.xgb.subsample", "0.9");
  apply_config_entry(cfg, "grid.xgb.colsample_bytree", "0.9");
  apply_config_entry(cfg, "grid.xgb.gamma", "0");
  cmd_benchmark(cfg);

  const fs::path out = dir.path / "out";
  CHECK(fs::exists(out / "reports" / "report.csv"));
  CHECK(fs::exists(out / "reports" / "report.txt"));
  CHECK(fs::exists(out / "scores" / "dt_grid.csv"));
  CHECK(fs::exists(out / "scores" / "xgb_predictions.csv"));
  CHECK(fs::exists(out / "artifacts" / "dt.json"));
  CHECK(fs::exists(out / "artifacts" / "xgb.json"));

  const std::string report = slurp(out / "reports" / "report.csv");
  CHECK(report.find("model,split,target,mae,rmse,r2,mape") == 0);
  CHECK(report.find("dt,train,temp,") != std::string::npos);
  CHECK(report.find("xgb,test,avg,") != std::string::npos);

  // predict with the saved artifact on the same dataset reproduces the
  // stored test predictions on overlapping timestamps
  cmd_predict(cfg, (out / "artifacts" / "xgb.json").string(),
              cfg.data_path);
  const auto preds = csv::read_file(out / "predictions.csv");
  const auto stored = csv::read_file(out / "scores" / "xgb_predictions.csv");
  REQUIRE(!preds.rows.empty());
  REQUIRE(!stored.rows.empty());
  std::size_t matched = 0;
  std::size_t pi = 0;
  for (const auto& srow : stored.rows) {
    while (pi < preds.rows.size() && preds.rows[pi][0] != srow[0]) ++pi;
    REQUIRE(pi < preds.rows.size());
    CHECK(preds.rows[pi][1] == srow[2]);  // temp_pred, identical text
    CHECK(preds.rows[pi][2] == srow[4]);  // humidity_pred
    ++matched;
  }
  CHECK(matched == stored.rows.size());

  // plotdata emits four files consistent with the stored predictions
  cmd_plotdata(cfg, "xgb");
  const auto scatter = csv::read_file(out / "plotdata" / "xgb_temp_scatter.csv");
  const auto tseries =
      csv::read_file(out / "plotdata" / "xgb_temp_timeseries.csv");
  CHECK(scatter.rows.size() == stored.rows.size());
  CHECK(tseries.rows.size() == stored.rows.size());
  for (std::size_t i = 0; i < scatter.rows.size(); ++i) {
    CHECK(scatter.rows[i][0] == stored.rows[i][1]);
    CHECK(scatter.rows[i][1] == stored.rows[i][2]);
    CHECK(tseries.rows[i][2] == scatter.rows[i][1]);
  }

  // unknown family and missing run outputs
  CHECK_THROWS_AS(cmd_plotdata(cfg, "hal9000"), InvalidParams);
  CHECK_THROWS_AS(cmd_plotdata(cfg, "svr"), MissingRunOutput);
}

TEST_CASE("artifact round-trip and version checking") {
  TempDir dir("artifact");
  ModelArtifact a;
  a.family = "dt";
  a.payload = {{"model", "decision_tree"}};
  a.base_seed = 42;
  a.best_config = {{"max_depth", 3}};
  a.feature_spec = FeatureSpec{};
  save_artifact(dir.path / "m.json", a);
  const auto back = load_artifact(dir.path / "m.json");
  CHECK(back.family == "dt");
  CHECK(back.best_config["max_depth"] == 3);
  REQUIRE(back.feature_spec.has_value());
  CHECK(back.feature_spec->lag_hours == std::vector<std::size_t>{2, 3, 6, 12, 24});

  // tampered version field
  nlohmann::json j;
  {
    std::ifstream in(dir.path / "m.json");
    in >> j;
  }
  j["format_version"] = "wxbench-artifact/999";
  csv::atomic_write(dir.path / "bad.json", j.dump());
  CHECK_THROWS_AS(load_artifact(dir.path / "bad.json"), VersionMismatch);
}

TEST_CASE("predict on a too-short dataset reports InsufficientHistory") {
  TempDir dir("short");
  SynthSpec spec;
  spec.hours = 260;
  csv::atomic_write(dir.path / "w.csv", synth_csv(spec));
  SynthSpec tiny;
  tiny.hours = 10;
  csv::atomic_write(dir.path / "tiny.csv", synth_csv(tiny));

  RunConfig cfg;
  cfg.data_path = (dir.path / "w.csv").string();
  cfg.out_dir = (dir.path / "out").string();
  cfg.models = {Family::dt};
  cfg.features.lag_hours = {2, 3};
  cfg.features.roll_windows = {3};
  apply_config_entry(cfg, "grid.dt.max_depth", "3");
  cmd_benchmark(cfg);

  CHECK_THROWS_AS(
      cmd_predict(cfg, (dir.path / "out" / "artifacts" / "dt.json").string(),
                  (dir.path / "tiny.csv").string()),
      InsufficientHistory);
}

TEST_CASE("eval report shape from the driver") {
  Matrix ytr(10, 2), ptr_(10, 2), yte(5, 2), pte(5, 2);
  Rng rng(104);
  for (std::size_t r = 0; r < 10; ++r)
    for (std::size_t c = 0; c < 2; ++c) {
      ytr(r, c) = rng.normal();
      ptr_(r, c) = ytr(r, c) + 0.1;
    }
  for (std::size_t r = 0; r < 5; ++r)
    for (std::size_t c = 0; c < 2; ++c) {
      yte(r, c) = rng.normal();
      pte(r, c) = yte(r, c);
    }
  const EvalReport rep = build_eval_report("m", ytr, ptr_, yte, pte);
  // 2 targets x 2 splits + 2 averaged rows
  CHECK(report_csv_rows(rep).size() == 6);
  CHECK(rep.test_temp.mae == 0.0);
  CHECK(rep.train_temp.mae == doctest::Approx(0.1));
  CHECK(rep.train_avg.mae ==
        doctest::Approx((rep.train_temp.mae + rep.train_humidity.mae) / 2.0));
}
