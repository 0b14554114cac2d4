#include "wxbench/benchmark.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <sstream>

#include "wxbench/csv.hpp"
#include "wxbench/errors.hpp"
#include "wxbench/forest.hpp"
#include "wxbench/gbt.hpp"
#include "wxbench/mlp.hpp"
#include "wxbench/stats.hpp"
#include "wxbench/svr.hpp"
#include "wxbench/tree.hpp"

namespace wxbench {

namespace fs = std::filesystem;

PreparedData load_and_preprocess(const std::string& path,
                                 const PhysicalBounds& bounds) {
  PreparedData out;
  const auto rows = load_weather_csv(path, &out.warnings);
  ObservationSeries series = parse_and_sort(rows);
  series = fill_missing(series);
  auto [repaired, flagged] = remove_outliers(series, bounds);
  out.series = std::move(repaired);
  out.outlier_cells = flagged;
  const std::size_t gaps = count_non_hourly_steps(out.series);
  if (gaps > 0)
    out.warnings.push_back(std::to_string(gaps) +
                           " consecutive timestamp steps are not one hour");
  return out;
}

std::unique_ptr<TabularModel> make_tabular_model(Family family,
                                                 const ModelConfig& config) {
  switch (family) {
    case Family::dt:
      return std::make_unique<DecisionTree>(config);
    case Family::rf:
      return std::make_unique<RandomForest>(config);
    case Family::mlp:
      return std::make_unique<Mlp>(config);
    case Family::svr:
      return std::make_unique<MultiOutputWrapper>(
          [](const ModelConfig& c) -> std::unique_ptr<TabularModel> {
            return std::make_unique<SvrModel>(c);
          },
          config);
    case Family::xgb:
      return std::make_unique<MultiOutputWrapper>(
          [](const ModelConfig& c) -> std::unique_ptr<TabularModel> {
            return std::make_unique<GradientBoostedTrees>(c);
          },
          config);
    default:
      throw InvalidParams("family '" + family_traits(family).name +
                          "' is not tabular");
  }
}

std::unique_ptr<SequenceModel> make_sequence_model(Family family,
                                                   const ModelConfig& config,
                                                   std::size_t window) {
  ModelConfig cfg = config;
  cfg["window"] = window;
  switch (family) {
    case Family::lstm:
      return std::make_unique<LstmNet>(cfg);
    case Family::cnn_lstm:
      return std::make_unique<CnnLstmNet>(cfg);
    default:
      throw InvalidParams("family '" + family_traits(family).name +
                          "' is not sequence-based");
  }
}

EvalReport build_eval_report(const std::string& model_name,
                             const Matrix& y_train, const Matrix& p_train,
                             const Matrix& y_test, const Matrix& p_test) {
  EvalReport r;
  r.model = model_name;
  const auto metrics_for = [](const Matrix& y, const Matrix& p, std::size_t col) {
    return compute_metrics(y.col(col), p.col(col));
  };
  r.train_temp = metrics_for(y_train, p_train, 0);
  r.train_humidity = metrics_for(y_train, p_train, 1);
  r.train_avg = average_two_targets(r.train_temp, r.train_humidity);
  r.test_temp = metrics_for(y_test, p_test, 0);
  r.test_humidity = metrics_for(y_test, p_test, 1);
  r.test_avg = average_two_targets(r.test_temp, r.test_humidity);
  return r;
}

namespace {

double avg_rmse(const Matrix& y, const Matrix& p) {
  MetricSet a = compute_metrics(y.col(0), p.col(0));
  MetricSet b = compute_metrics(y.col(1), p.col(1));
  return (a.rmse + b.rmse) / 2.0;
}

// Fold-indexed immutable data shared by every config's cells.
struct TabularFoldData {
  Matrix x_train, y_train, x_test, y_test;
  std::shared_ptr<const Matrix> sq_dists;  // of x_train (scaled), for SVR
};

Matrix squared_distances(const Matrix& x) {
  Matrix d(x.rows(), x.rows());
  for (std::size_t i = 0; i < x.rows(); ++i) {
    d(i, i) = 0.0;
    for (std::size_t j = i + 1; j < x.rows(); ++j) {
      double s = 0.0;
      for (std::size_t c = 0; c < x.cols(); ++c) {
        const double diff = x(i, c) - x(j, c);
        s += diff * diff;
      }
      d(i, j) = s;
      d(j, i) = s;
    }
  }
  return d;
}

}  // namespace

std::unique_ptr<TabularModel> tabular_model_from_json(
    const nlohmann::json& payload) {
  if (payload.contains("wrapper")) {
    std::vector<std::unique_ptr<TabularModel>> parts;
    for (const auto& pj : payload.at("parts"))
      parts.push_back(tabular_model_from_json(pj));
    return std::make_unique<MultiOutputWrapper>(MultiOutputWrapper::from_parts(
        payload.at("config"), std::move(parts)));
  }
  const std::string kind = payload.value("model", "");
  if (kind == "decision_tree")
    return std::make_unique<DecisionTree>(DecisionTree::from_json(payload));
  if (kind == "random_forest")
    return std::make_unique<RandomForest>(RandomForest::from_json(payload));
  if (kind == "gradient_boosted_trees")
    return std::make_unique<GradientBoostedTrees>(
        GradientBoostedTrees::from_json(payload));
  if (kind == "svr") return std::make_unique<SvrModel>(SvrModel::from_json(payload));
  if (kind == "mlp") return std::make_unique<Mlp>(Mlp::from_json(payload));
  throw VersionMismatch("unknown model payload kind '" + kind + "'");
}

FamilyResult run_tabular_family(Family family, const HyperGrid& grid,
                                const FeatureMatrix& train,
                                const FeatureMatrix& test, const CvScheme& cv,
                                const SeedPlan& seeds, int jobs) {
  const FamilyTraits& traits = family_traits(family);
  FamilyResult out;
  out.family = traits.name;

  const std::size_t n = train.rows();
  const auto folds = time_series_folds(n, cv.k);

  // per-fold slices (scaled copies for the scale-sensitive families)
  std::vector<TabularFoldData> fold_data(folds.size());
  for (std::size_t fi = 0; fi < folds.size(); ++fi) {
    const FoldRange& f = folds[fi];
    Matrix xtr = train.x.slice_rows(f.train_begin, f.train_end);
    Matrix xte = train.x.slice_rows(f.test_begin, f.test_end);
    if (traits.needs_scaling) {
      const Standardizer std_fit = Standardizer::fit(xtr);
      xtr = std_fit.transform(xtr);
      xte = std_fit.transform(xte);
    }
    fold_data[fi].x_train = std::move(xtr);
    fold_data[fi].x_test = std::move(xte);
    fold_data[fi].y_train = train.y.slice_rows(f.train_begin, f.train_end);
    fold_data[fi].y_test = train.y.slice_rows(f.test_begin, f.test_end);
    if (family == Family::svr)
      fold_data[fi].sq_dists = std::make_shared<const Matrix>(
          squared_distances(fold_data[fi].x_train));
  }

  auto fold_index = [&](const FoldRange& f) {
    for (std::size_t fi = 0; fi < folds.size(); ++fi)
      if (folds[fi].test_begin == f.test_begin) return fi;
    throw InvalidParams("unknown fold");
  };

  CellScorer scorer = [&](const ModelConfig& config, const FoldRange& f,
                          std::uint64_t seed) {
    const TabularFoldData& data = fold_data[fold_index(f)];
    std::unique_ptr<TabularModel> model;
    if (family == Family::svr) {
      auto cache = data.sq_dists;
      model = std::make_unique<MultiOutputWrapper>(
          [cache](const ModelConfig& c) -> std::unique_ptr<TabularModel> {
            auto svr = std::make_unique<SvrModel>(c);
            svr->set_distance_cache(cache);
            return svr;
          },
          config);
    } else {
      model = make_tabular_model(family, config);
    }
    model->fit(data.x_train, data.y_train, seed);
    const Matrix pred = model->predict(data.x_test);
    return avg_rmse(data.y_test, pred);
  };

  const GridSearchResult search =
      grid_search(traits.name, grid, n, cv, seeds, scorer, jobs);
  out.best_config = search.best_config;
  out.best_cv_score = search.best_score;
  out.score_table = search.table;

  // final refit on the whole training split, evaluated on both splits
  const std::uint64_t final_seed = seeds.run_seed(
      traits.name, search.best_index, static_cast<std::size_t>(cv.k));
  Matrix xtr = train.x;
  Matrix xte = test.x;
  std::optional<Standardizer> scaler;
  if (traits.needs_scaling) {
    scaler = Standardizer::fit(train.x);
    xtr = scaler->transform(train.x);
    xte = scaler->transform(test.x);
  }
  auto model = make_tabular_model(family, search.best_config);
  model->fit(xtr, train.y, final_seed);
  const Matrix p_train = model->predict(xtr);
  const Matrix p_test = model->predict(xte);

  out.report = build_eval_report(traits.name, train.y, p_train, test.y, p_test);
  out.test_timestamps = test.row_timestamps;
  out.test_actual = test.y;
  out.test_pred = p_test;

  out.artifact.family = traits.name;
  out.artifact.payload = model->to_json();
  out.artifact.standardizer = scaler;
  out.artifact.base_seed = seeds.base_seed;
  out.artifact.best_config = search.best_config;
  return out;
}

FamilyResult run_sequence_family(Family family, const HyperGrid& grid,
                                 const SequenceBatch& train,
                                 const SequenceBatch& test,
                                 const Matrix& series_matrix,
                                 const CvScheme& cv, const SeedPlan& seeds,
                                 int jobs) {
  const FamilyTraits& traits = family_traits(family);
  FamilyResult out;
  out.family = traits.name;

  const std::size_t n = train.n_samples;
  const std::size_t window = train.window;

  CellScorer scorer = [&](const ModelConfig& config, const FoldRange& f,
                          std::uint64_t seed) {
    // channel statistics from the series rows known when this fold trains:
    // everything up to the last training sample's target hour
    const Standardizer stats =
        Standardizer::fit(series_matrix.slice_rows(0, f.train_end + window));
    auto model = make_sequence_model(family, config, window);
    const SequenceBatch fold_train = train.slice(f.train_begin, f.train_end);
    model->fit(fold_train, stats, seed);
    const SequenceBatch fold_test = train.slice(f.test_begin, f.test_end);
    const Matrix pred = model->predict(fold_test);
    return avg_rmse(fold_test.y, pred);
  };

  const GridSearchResult search =
      grid_search(traits.name, grid, n, cv, seeds, scorer, jobs);
  out.best_config = search.best_config;
  out.best_cv_score = search.best_score;
  out.score_table = search.table;

  const std::uint64_t final_seed = seeds.run_seed(
      traits.name, search.best_index, static_cast<std::size_t>(cv.k));
  const Standardizer stats =
      Standardizer::fit(series_matrix.slice_rows(0, n + window));
  auto model = make_sequence_model(family, search.best_config, window);
  model->fit(train, stats, final_seed);
  const Matrix p_train = model->predict(train);
  const Matrix p_test = model->predict(test);

  out.report = build_eval_report(traits.name, train.y, p_train, test.y, p_test);
  out.test_timestamps = test.origins;
  out.test_actual = test.y;
  out.test_pred = p_test;

  out.artifact.family = traits.name;
  out.artifact.payload = model->to_json();
  out.artifact.window = window;
  out.artifact.base_seed = seeds.base_seed;
  out.artifact.best_config = search.best_config;
  return out;
}

// ---------------------------------------------------------------------------
// commands

namespace {

void print_warnings(const PreparedData& data) {
  for (const auto& w : data.warnings) std::cerr << "warning: " << w << "\n";
  if (data.outlier_cells > 0)
    std::cerr << "note: repaired " << data.outlier_cells
              << " out-of-bounds cells\n";
}

std::string fmt(double v, const char* spec = "%.6f") {
  char buf[64];
  std::snprintf(buf, sizeof(buf), spec, v);
  return buf;
}

void write_histogram_csv(const fs::path& path, const Histogram& h) {
  std::string out = "bin_start,bin_end,count\n";
  for (std::size_t i = 0; i < h.counts.size(); ++i)
    out += fmt(h.edges[i]) + "," + fmt(h.edges[i + 1]) + "," +
           std::to_string(h.counts[i]) + "\n";
  csv::atomic_write(path, out);
}

}  // namespace

void cmd_analyze(const RunConfig& cfg) {
  if (cfg.data_path.empty()) throw ConfigError("no dataset path configured");
  const PreparedData data = load_and_preprocess(cfg.data_path, cfg.bounds);
  print_warnings(data);

  const fs::path reports = fs::path(cfg.out_dir) / "reports";

  write_histogram_csv(reports / "histogram_temp.csv",
                      histogram(data.series.column(Var::temp), cfg.analyze_bins));
  write_histogram_csv(
      reports / "histogram_humidity.csv",
      histogram(data.series.column(Var::humidity), cfg.analyze_bins));

  const CorrelationResult corr = pearson_correlation(data.series.to_matrix());
  std::string out = "variable";
  for (Var v : kAllVars) out += "," + var_name(v);
  out += "\n";
  for (std::size_t i = 0; i < kNumVars; ++i) {
    out += var_name(static_cast<Var>(i));
    for (std::size_t j = 0; j < kNumVars; ++j) out += "," + fmt(corr.r(i, j));
    out += "\n";
  }
  csv::atomic_write(reports / "correlation.csv", out);
  std::cout << "analyze: wrote 3 files under " << reports.string() << "\n";
}

namespace {

std::string score_table_csv(const std::string& family,
                            const std::vector<ScoreRow>& rows) {
  std::string out = "family,config_json,fold,rmse_avg\n";
  for (const auto& r : rows) {
    out += family + "," + csv::escape_field(r.config_json) + "," +
           std::to_string(r.fold) + ",";
    out += std::isfinite(r.rmse_avg) ? fmt(r.rmse_avg, "%.9f") : "inf";
    out += "\n";
  }
  return out;
}

std::string predictions_csv(const FamilyResult& r) {
  std::string out =
      "timestamp,temp_actual,temp_pred,humidity_actual,humidity_pred\n";
  for (std::size_t i = 0; i < r.test_timestamps.size(); ++i) {
    out += format_datetime(r.test_timestamps[i]) + "," +
           fmt(r.test_actual(i, 0), "%.9f") + "," +
           fmt(r.test_pred(i, 0), "%.9f") + "," +
           fmt(r.test_actual(i, 1), "%.9f") + "," +
           fmt(r.test_pred(i, 1), "%.9f") + "\n";
  }
  return out;
}

}  // namespace

void cmd_benchmark(const RunConfig& cfg) {
  cfg.validate();
  if (cfg.data_path.empty()) throw ConfigError("no dataset path configured");
  const PreparedData data = load_and_preprocess(cfg.data_path, cfg.bounds);
  print_warnings(data);

  const fs::path out_root(cfg.out_dir);
  const CvScheme cv{cfg.cv_folds};
  const SeedPlan seeds{cfg.base_seed};

  // tabular pipeline
  const bool any_tabular =
      std::any_of(cfg.models.begin(), cfg.models.end(), [](Family f) {
        return !family_traits(f).sequence_input;
      });
  const bool any_sequence =
      std::any_of(cfg.models.begin(), cfg.models.end(), [](Family f) {
        return family_traits(f).sequence_input;
      });

  FeatureMatrix feat_train, feat_test;
  if (any_tabular) {
    const FeatureMatrix features = assemble_matrix(data.series, cfg.features);
    std::tie(feat_train, feat_test) =
        chronological_split(features, cfg.split_ratio);
  }

  SequenceBatch seq_train, seq_test;
  Matrix series_matrix;
  if (any_sequence) {
    series_matrix = data.series.to_matrix();
    const SequenceBatch windows =
        build_windows(series_matrix, data.series.timestamps, cfg.window);
    std::tie(seq_train, seq_test) = chronological_split(windows, cfg.split_ratio);
  }

  std::vector<FamilyResult> results;
  for (Family family : cfg.models) {
    const std::string name = family_traits(family).name;
    std::cerr << "benchmark: running " << name << "...\n";
    HyperGrid storage;
    const HyperGrid& grid = effective_grid(cfg, family, storage);
    FamilyResult res;
    try {
      if (family_traits(family).sequence_input)
        res = run_sequence_family(family, grid, seq_train, seq_test,
                                  series_matrix, cv, seeds, cfg.jobs);
      else
        res = run_tabular_family(family, grid, feat_train, feat_test, cv,
                                 seeds, cfg.jobs);
      if (!family_traits(family).sequence_input)
        res.artifact.feature_spec = cfg.features;
    } catch (const Error& e) {
      res.family = name;
      res.failed = true;
      res.error_kind = e.kind();
      res.error_message = e.what();
    } catch (const std::exception& e) {
      res.family = name;
      res.failed = true;
      res.error_kind = "Unhandled";
      res.error_message = e.what();
    }
    results.push_back(std::move(res));
  }

  // per-family outputs
  for (const FamilyResult& r : results) {
    if (r.failed) continue;
    csv::atomic_write(out_root / "scores" / (r.family + "_grid.csv"),
                      score_table_csv(r.family, r.score_table));
    csv::atomic_write(out_root / "scores" / (r.family + "_predictions.csv"),
                      predictions_csv(r));
    save_artifact(out_root / "artifacts" / (r.family + ".json"), r.artifact);
  }

  // combined report
  std::string csv_out = report_csv_header() + "\n";
  std::string txt_out = report_text_header() + "\n";
  for (const FamilyResult& r : results) {
    if (r.failed) {
      csv_out += r.family + ",failed,failed,,,,\n";
      txt_out += r.family + "  FAILED: " + r.error_kind + ": " +
                 r.error_message + "\n";
      continue;
    }
    for (const auto& row : report_csv_rows(r.report)) csv_out += row + "\n";
    txt_out += report_text_block(r.report);
  }
  csv::atomic_write(out_root / "reports" / "report.csv", csv_out);
  csv::atomic_write(out_root / "reports" / "report.txt", txt_out);

  std::cout << txt_out;
  for (const FamilyResult& r : results)
    if (r.failed)
      std::cerr << "benchmark: " << r.family << " failed: " << r.error_message
                << "\n";
}

void cmd_predict(const RunConfig& cfg, const std::string& artifact_path,
                 const std::string& data_path) {
  const ModelArtifact artifact = load_artifact(artifact_path);
  const PreparedData data = load_and_preprocess(data_path, cfg.bounds);
  print_warnings(data);

  std::vector<Timestamp> stamps;
  Matrix preds;

  const Family family = family_from_name(artifact.family);
  if (!family_traits(family).sequence_input) {
    if (!artifact.feature_spec)
      throw VersionMismatch("artifact lacks a feature spec");
    FeatureMatrix fm;
    try {
      fm = assemble_matrix(data.series, *artifact.feature_spec);
    } catch (const LagOutOfRange&) {
      throw InsufficientHistory("dataset shorter than the required history");
    }
    Matrix x = fm.x;
    if (artifact.standardizer) x = artifact.standardizer->transform(x);
    const auto model = tabular_model_from_json(artifact.payload);
    preds = model->predict(x);
    stamps = fm.row_timestamps;
  } else {
    if (!artifact.window) throw VersionMismatch("artifact lacks a window");
    const Matrix series_matrix = data.series.to_matrix();
    SequenceBatch batch;
    try {
      batch = build_windows(series_matrix, data.series.timestamps,
                            *artifact.window);
    } catch (const SeriesTooShort&) {
      throw InsufficientHistory("dataset shorter than the model window");
    }
    std::unique_ptr<SequenceModel> model;
    if (family == Family::lstm)
      model = std::make_unique<LstmNet>(LstmNet::from_json(artifact.payload));
    else
      model =
          std::make_unique<CnnLstmNet>(CnnLstmNet::from_json(artifact.payload));
    preds = model->predict(batch);
    stamps = batch.origins;
  }

  std::string out = "timestamp,temp_pred,humidity_pred\n";
  for (std::size_t i = 0; i < stamps.size(); ++i)
    out += format_datetime(stamps[i]) + "," + fmt(preds(i, 0), "%.9f") + "," +
           fmt(preds(i, 1), "%.9f") + "\n";
  const fs::path path = fs::path(cfg.out_dir) / "predictions.csv";
  csv::atomic_write(path, out);
  std::cout << "predict: wrote " << stamps.size() << " rows to "
            << path.string() << "\n";
}

void cmd_plotdata(const RunConfig& cfg, const std::string& family) {
  family_from_name(family);  // validates the name
  const fs::path src =
      fs::path(cfg.out_dir) / "scores" / (family + "_predictions.csv");
  if (!fs::exists(src))
    throw MissingRunOutput("no benchmark predictions at " + src.string() +
                           "; run `benchmark` first");
  const csv::Table table = csv::read_file(src);

  const int i_ts = table.column_index("timestamp");
  const int i_ta = table.column_index("temp_actual");
  const int i_tp = table.column_index("temp_pred");
  const int i_ha = table.column_index("humidity_actual");
  const int i_hp = table.column_index("humidity_pred");
  if (i_ts < 0 || i_ta < 0 || i_tp < 0 || i_ha < 0 || i_hp < 0)
    throw MissingRunOutput("prediction file has unexpected columns");

  const fs::path plot = fs::path(cfg.out_dir) / "plotdata";
  const auto make_files = [&](const std::string& target, int ai, int pi) {
    std::string series = "timestamp,actual,predicted\n";
    std::string scatter = "actual,predicted\n";
    for (const auto& row : table.rows) {
      series += row[static_cast<std::size_t>(i_ts)] + "," +
                row[static_cast<std::size_t>(ai)] + "," +
                row[static_cast<std::size_t>(pi)] + "\n";
      scatter += row[static_cast<std::size_t>(ai)] + "," +
                 row[static_cast<std::size_t>(pi)] + "\n";
    }
    csv::atomic_write(plot / (family + "_" + target + "_timeseries.csv"),
                      series);
    csv::atomic_write(plot / (family + "_" + target + "_scatter.csv"), scatter);
  };
  make_files("temp", i_ta, i_tp);
  make_files("humidity", i_ha, i_hp);
  std::cout << "plotdata: wrote 4 files under " << plot.string() << "\n";
}

}  // namespace wxbench
