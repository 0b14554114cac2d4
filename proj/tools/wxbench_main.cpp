#include <cstdint>
#include <iostream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "wxbench/benchmark.hpp"
#include "wxbench/csv.hpp"
#include "wxbench/errors.hpp"
#include "wxbench/runconfig.hpp"
#include "wxbench/synth.hpp"

namespace {

struct CommonFlags {
  std::string config_path;
  std::string data_path;
  std::string out_dir;
  std::string models;
  std::vector<std::string> sets;
  std::int64_t seed = -1;
  int jobs = 0;
};

void add_common(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("--config", flags.config_path, "config file (key = value)");
  cmd->add_option("--data", flags.data_path, "weather CSV path");
  cmd->add_option("--out", flags.out_dir, "output directory");
  cmd->add_option("--models", flags.models, "comma-separated family list");
  cmd->add_option("--seed", flags.seed, "base random seed");
  cmd->add_option("--jobs", flags.jobs, "parallel grid cells (0 = all cores)");
  cmd->add_option("--set", flags.sets, "config override key=value")
      ->take_all();
}

wxbench::RunConfig build_config(const CommonFlags& flags) {
  wxbench::RunConfig cfg;
  if (!flags.config_path.empty())
    cfg = wxbench::load_run_config(flags.config_path);
  for (const auto& kv : flags.sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos)
      throw wxbench::ConfigError("--set expects key=value, got: " + kv);
    wxbench::apply_config_entry(cfg, kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (!flags.data_path.empty()) cfg.data_path = flags.data_path;
  if (!flags.out_dir.empty()) cfg.out_dir = flags.out_dir;
  if (!flags.models.empty())
    wxbench::apply_config_entry(cfg, "models", flags.models);
  if (flags.seed >= 0) cfg.base_seed = static_cast<std::uint64_t>(flags.seed);
  if (flags.jobs > 0)
    cfg.jobs = flags.jobs;
  else if (flags.jobs == 0 && cfg.jobs == 1) {
    const unsigned hc = std::thread::hardware_concurrency();
    if (hc > 1) cfg.jobs = static_cast<int>(hc);
  }
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hourly temperature/humidity forecasting benchmark"};
  app.require_subcommand(1);

  CommonFlags flags;

  auto* analyze = app.add_subcommand(
      "analyze", "exploratory statistics: histograms and correlations");
  add_common(analyze, flags);

  auto* benchmark = app.add_subcommand(
      "benchmark", "grid-search, fit and evaluate the requested families");
  add_common(benchmark, flags);

  auto* predict =
      app.add_subcommand("predict", "apply a saved model artifact to a CSV");
  add_common(predict, flags);
  std::string artifact_path;
  predict->add_option("--artifact", artifact_path, "model artifact path")
      ->required();

  auto* plotdata = app.add_subcommand(
      "plotdata", "emit per-target time-series and scatter plot data");
  add_common(plotdata, flags);
  std::string family;
  plotdata->add_option("--family", family, "model family name")->required();

  auto* synth = app.add_subcommand(
      "synth", "generate a synthetic hourly weather CSV for experiments");
  std::string synth_out = "synthetic.csv";
  wxbench::SynthSpec synth_spec;
  synth->add_option("--hours", synth_spec.hours, "number of hourly rows");
  synth->add_option("--seed", synth_spec.seed, "generator seed");
  synth->add_option("--out-file", synth_out, "destination CSV path");

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand(synth)) {
      wxbench::csv::atomic_write(synth_out, wxbench::synth_csv(synth_spec));
      std::cout << "synth: wrote " << synth_spec.hours << " rows to "
                << synth_out << "\n";
      return 0;
    }
    wxbench::RunConfig cfg = build_config(flags);
    if (app.got_subcommand(analyze)) {
      wxbench::cmd_analyze(cfg);
    } else if (app.got_subcommand(benchmark)) {
      wxbench::cmd_benchmark(cfg);
    } else if (app.got_subcommand(predict)) {
      if (cfg.data_path.empty())
        throw wxbench::ConfigError("predict needs --data");
      wxbench::cmd_predict(cfg, artifact_path, cfg.data_path);
    } else if (app.got_subcommand(plotdata)) {
      wxbench::cmd_plotdata(cfg, family);
    }
  } catch (const wxbench::Error& e) {
    std::cerr << "error: " << e.kind() << ": " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: Unhandled: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
