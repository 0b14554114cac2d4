#include "wxbench/artifact.hpp"

#include <fstream>
#include <sstream>

#include "wxbench/csv.hpp"
#include "wxbench/errors.hpp"

namespace wxbench {

nlohmann::json feature_spec_to_json(const FeatureSpec& spec) {
  nlohmann::json j;
  j["targets"] = nlohmann::json::array();
  for (Var v : spec.targets) j["targets"].push_back(var_name(v));
  j["lag_hours"] = spec.lag_hours;
  j["roll_windows"] = spec.roll_windows;
  j["covariates"] = nlohmann::json::array();
  for (Var v : spec.covariates) j["covariates"].push_back(var_name(v));
  return j;
}

FeatureSpec feature_spec_from_json(const nlohmann::json& j) {
  FeatureSpec spec;
  spec.targets.clear();
  for (const auto& t : j.at("targets"))
    spec.targets.push_back(var_from_name(t.get<std::string>()));
  spec.lag_hours = j.at("lag_hours").get<std::vector<std::size_t>>();
  spec.roll_windows = j.at("roll_windows").get<std::vector<std::size_t>>();
  spec.covariates.clear();
  for (const auto& c : j.at("covariates"))
    spec.covariates.push_back(var_from_name(c.get<std::string>()));
  return spec;
}

void save_artifact(const std::filesystem::path& path, const ModelArtifact& a) {
  nlohmann::json j;
  j["format_version"] = kArtifactFormatVersion;
  j["family"] = a.family;
  j["base_seed"] = a.base_seed;
  j["best_config"] = a.best_config;
  j["payload"] = a.payload;
  if (a.standardizer) {
    j["standardizer"] = {{"mean", a.standardizer->mean()},
                         {"stddev", a.standardizer->stddev()}};
  }
  if (a.feature_spec) j["feature_spec"] = feature_spec_to_json(*a.feature_spec);
  if (a.window) j["window"] = *a.window;
  csv::atomic_write(path, j.dump(2) + "\n");
}

ModelArtifact load_artifact(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open artifact: " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw IoError("cannot parse artifact " + path.string() + ": " + e.what());
  }
  const auto version = j.value("format_version", std::string());
  if (version != kArtifactFormatVersion)
    throw VersionMismatch("artifact format '" + version + "' != '" +
                          kArtifactFormatVersion + "'");
  ModelArtifact a;
  a.family = j.at("family").get<std::string>();
  a.base_seed = j.at("base_seed").get<std::uint64_t>();
  a.best_config = j.at("best_config");
  a.payload = j.at("payload");
  if (j.contains("standardizer"))
    a.standardizer = Standardizer::from_params(
        j["standardizer"].at("mean").get<std::vector<double>>(),
        j["standardizer"].at("stddev").get<std::vector<double>>());
  if (j.contains("feature_spec"))
    a.feature_spec = feature_spec_from_json(j["feature_spec"]);
  if (j.contains("window")) a.window = j["window"].get<std::size_t>();
  return a;
}

}  // namespace wxbench
