#pragma once

#include <memory>
#include <string>
#include <vector>

#include "wxbench/artifact.hpp"
#include "wxbench/cv.hpp"
#include "wxbench/features.hpp"
#include "wxbench/metrics.hpp"
#include "wxbench/runconfig.hpp"
#include "wxbench/sequence.hpp"
#include "wxbench/timeseries.hpp"

namespace wxbench {

// Loads the CSV, repairs gaps and outliers, and reports what was done.
struct PreparedData {
  ObservationSeries series;
  std::size_t outlier_cells = 0;
  std::vector<std::string> warnings;
};
PreparedData load_and_preprocess(const std::string& path,
                                 const PhysicalBounds& bounds);

std::unique_ptr<TabularModel> make_tabular_model(Family family,
                                                 const ModelConfig& config);
std::unique_ptr<SequenceModel> make_sequence_model(Family family,
                                                   const ModelConfig& config,
                                                   std::size_t window);
// Inverse of TabularModel::to_json, wrapper payloads included.
std::unique_ptr<TabularModel> tabular_model_from_json(
    const nlohmann::json& payload);

EvalReport build_eval_report(const std::string& model_name,
                             const Matrix& y_train, const Matrix& p_train,
                             const Matrix& y_test, const Matrix& p_test);

// Outcome of one family's grid search + final fit.
struct FamilyResult {
  std::string family;
  bool failed = false;
  std::string error_kind;
  std::string error_message;
  ModelConfig best_config;
  double best_cv_score = 0.0;
  std::vector<ScoreRow> score_table;
  EvalReport report;
  std::vector<Timestamp> test_timestamps;
  Matrix test_actual;  // n x 2
  Matrix test_pred;    // n x 2
  ModelArtifact artifact;
};

FamilyResult run_tabular_family(Family family, const HyperGrid& grid,
                                const FeatureMatrix& train,
                                const FeatureMatrix& test, const CvScheme& cv,
                                const SeedPlan& seeds, int jobs);

// `series` is the full preprocessed observation matrix the windows were
// built from; channel statistics for each fold come from the series rows
// known at that fold's training time.
FamilyResult run_sequence_family(Family family, const HyperGrid& grid,
                                 const SequenceBatch& train,
                                 const SequenceBatch& test,
                                 const Matrix& series_matrix,
                                 const CvScheme& cv, const SeedPlan& seeds,
                                 int jobs);

// CLI commands. All artifacts land under cfg.out_dir in the fixed layout
// reports/, artifacts/, plotdata/, scores/.
void cmd_analyze(const RunConfig& cfg);
void cmd_benchmark(const RunConfig& cfg);
void cmd_predict(const RunConfig& cfg, const std::string& artifact_path,
                 const std::string& data_path);
void cmd_plotdata(const RunConfig& cfg, const std::string& family);

}  // namespace wxbench
