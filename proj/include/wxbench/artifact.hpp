#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include <json.hpp>

#include "wxbench/features.hpp"
#include "wxbench/model.hpp"

namespace wxbench {

inline constexpr const char* kArtifactFormatVersion = "wxbench-artifact/1";

// Everything needed to reload a trained model and apply it to fresh data.
struct ModelArtifact {
  std::string family;
  nlohmann::json payload;  // model-specific serialized state
  std::optional<Standardizer> standardizer;  // tabular feature scaling
  std::optional<FeatureSpec> feature_spec;   // tabular families
  std::optional<std::size_t> window;         // sequence families
  std::uint64_t base_seed = 0;
  ModelConfig best_config;
};

nlohmann::json feature_spec_to_json(const FeatureSpec& spec);
FeatureSpec feature_spec_from_json(const nlohmann::json& j);

void save_artifact(const std::filesystem::path& path, const ModelArtifact& a);
// Throws VersionMismatch when the format tag differs.
ModelArtifact load_artifact(const std::filesystem::path& path);

}  // namespace wxbench
