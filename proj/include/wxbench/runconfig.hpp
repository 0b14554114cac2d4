#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "wxbench/features.hpp"
#include "wxbench/model.hpp"
#include "wxbench/timeseries.hpp"

namespace wxbench {

// Run settings merged from (in order of increasing precedence) defaults, a
// key=value config file, --set overrides and explicit CLI flags.
struct RunConfig {
  std::string data_path;
  std::string out_dir = "out";
  PhysicalBounds bounds = PhysicalBounds::defaults();
  FeatureSpec features;
  std::vector<Family> models = all_families();
  std::map<std::string, HyperGrid> grid_overrides;  // keyed by family name
  double split_ratio = 0.8;
  int cv_folds = 5;
  std::uint64_t base_seed = 42;
  int jobs = 1;
  std::size_t window = 24;       // sequence-model lookback
  std::size_t analyze_bins = 30;

  void validate() const;
};

// Flat `key = value` text file; '#' starts a comment. Unknown keys are an
// error so typos never pass silently.
RunConfig load_run_config(const std::string& path);

// Applies one `key=value` assignment (same key space as the file).
void apply_config_entry(RunConfig& cfg, const std::string& key,
                        const std::string& value);

// The paper-specified search space for each family.
HyperGrid default_grid(Family family);

// Grid override when present, default grid otherwise.
const HyperGrid& effective_grid(const RunConfig& cfg, Family family,
                                HyperGrid& storage);

}  // namespace wxbench
