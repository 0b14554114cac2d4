#include "wxbench/runconfig.hpp"

#include <algorithm>
#include <cctype>
#include <limits>
#include <fstream>
#include <sstream>

#include "wxbench/errors.hpp"

namespace wxbench {

void RunConfig::validate() const {
  if (models.empty()) throw ConfigError("model list must be non-empty");
  if (!(split_ratio > 0.0 && split_ratio < 1.0))
    throw ConfigError("split_ratio must lie in (0,1)");
  if (cv_folds < 2) throw ConfigError("cv_folds must be >= 2");
  if (jobs < 1) throw ConfigError("jobs must be >= 1");
  if (window < 2) throw ConfigError("window must be >= 2");
  bounds.validate();
  features.validate();
}

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ',') {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(trim(cur));
  return out;
}

// Scalar grid values: null / booleans / numbers / "50-50" layer shapes /
// bare strings.
nlohmann::json parse_grid_value(const std::string& raw) {
  const std::string s = trim(raw);
  if (s == "null") return nullptr;
  if (s == "true") return true;
  if (s == "false") return false;
  if (s.find('-') != std::string::npos &&
      s.find_first_not_of("0123456789-") == std::string::npos && s[0] != '-') {
    std::vector<int> widths;
    std::stringstream ss(s);
    std::string part;
    while (std::getline(ss, part, '-')) widths.push_back(std::stoi(part));
    return widths;
  }
  try {
    std::size_t used = 0;
    if (s.find('.') == std::string::npos && s.find('e') == std::string::npos) {
      const long long v = std::stoll(s, &used);
      if (used == s.size()) return v;
    }
    const double v = std::stod(s, &used);
    if (used == s.size()) return v;
  } catch (const std::exception&) {
  }
  return s;
}

double parse_double(const std::string& key, const std::string& value) {
  try {
    return std::stod(value);
  } catch (const std::exception&) {
    throw ConfigError("cannot parse numeric value for '" + key + "': " + value);
  }
}

long long parse_int(const std::string& key, const std::string& value) {
  try {
    return std::stoll(value);
  } catch (const std::exception&) {
    throw ConfigError("cannot parse integer value for '" + key + "': " + value);
  }
}

std::vector<std::size_t> parse_size_list(const std::string& key,
                                         const std::string& value) {
  std::vector<std::size_t> out;
  for (const auto& item : split_list(value))
    out.push_back(static_cast<std::size_t>(parse_int(key, item)));
  return out;
}

}  // namespace

void apply_config_entry(RunConfig& cfg, const std::string& raw_key,
                        const std::string& raw_value) {
  const std::string key = trim(raw_key);
  const std::string value = trim(raw_value);

  if (key == "data") {
    cfg.data_path = value;
  } else if (key == "out") {
    cfg.out_dir = value;
  } else if (key == "models") {
    cfg.models.clear();
    for (const auto& name : split_list(value))
      cfg.models.push_back(family_from_name(name));
  } else if (key == "split_ratio") {
    cfg.split_ratio = parse_double(key, value);
  } else if (key == "cv_folds") {
    cfg.cv_folds = static_cast<int>(parse_int(key, value));
  } else if (key == "seed") {
    cfg.base_seed = static_cast<std::uint64_t>(parse_int(key, value));
  } else if (key == "jobs") {
    cfg.jobs = static_cast<int>(parse_int(key, value));
  } else if (key == "window") {
    cfg.window = static_cast<std::size_t>(parse_int(key, value));
  } else if (key == "analyze_bins") {
    cfg.analyze_bins = static_cast<std::size_t>(parse_int(key, value));
  } else if (key.rfind("bounds.", 0) == 0) {
    const Var v = var_from_name(key.substr(7));
    const auto parts = split_list(value);
    if (parts.size() != 2)
      throw ConfigError("bounds need 'lower,upper', got: " + value);
    const double lo = parts[0] == "-inf"
                          ? -std::numeric_limits<double>::infinity()
                          : parse_double(key, parts[0]);
    const double hi = parts[1] == "inf"
                          ? std::numeric_limits<double>::infinity()
                          : parse_double(key, parts[1]);
    cfg.bounds.limit(v) = {lo, hi};
  } else if (key == "features.lags") {
    cfg.features.lag_hours = parse_size_list(key, value);
  } else if (key == "features.windows") {
    cfg.features.roll_windows = parse_size_list(key, value);
  } else if (key == "features.covariates") {
    cfg.features.covariates.clear();
    for (const auto& name : split_list(value))
      cfg.features.covariates.push_back(var_from_name(name));
  } else if (key.rfind("grid.", 0) == 0) {
    const std::string rest = key.substr(5);
    const auto dot = rest.find('.');
    if (dot == std::string::npos)
      throw ConfigError("grid override key must be grid.<family>.<param>");
    const std::string family = rest.substr(0, dot);
    family_from_name(family);  // validates
    const std::string param = rest.substr(dot + 1);
    std::vector<nlohmann::json> values;
    for (const auto& item : split_list(value))
      values.push_back(parse_grid_value(item));
    cfg.grid_overrides[family].set(param, std::move(values));
  } else {
    throw ConfigError("unknown config key '" + key + "'");
  }
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file: " + path);
  RunConfig cfg;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(line_no) +
                        " is not 'key = value': " + line);
    apply_config_entry(cfg, line.substr(0, eq), line.substr(eq + 1));
  }
  return cfg;
}

HyperGrid default_grid(Family family) {
  HyperGrid g;
  switch (family) {
    case Family::svr:
      g.set("C", {0.1, 1.0, 10.0, 100.0});
      g.set("gamma", {0.001, 0.01, 0.1, 1.0});
      g.set("epsilon", {0.01, 0.1, 0.2});
      break;
    case Family::mlp:
      g.set("hidden_layers", {std::vector<int>{50}, std::vector<int>{100},
                              std::vector<int>{50, 50},
                              std::vector<int>{100, 100}});
      g.set("alpha", {0.0005, 0.001, 0.002});
      g.set("learning_rate", {0.001, 0.005, 0.01});
      break;
    case Family::rf:
      g.set("n_estimators", {10, 50, 100});
      g.set("max_features", {0.3, 0.5, 0.7});
      g.set("min_samples_leaf", {1, 2, 4});
      g.set("bootstrap", {true, false});
      break;
    case Family::dt:
      g.set("max_depth", {3, 5, 7, 10});
      g.set("min_samples_leaf", {1, 2, 4});
      g.set("criterion", {"squared_error", "friedman_mse"});
      g.set("max_features", {"sqrt", "log2", "all"});
      break;
    case Family::lstm:
      g.set("layers", {1, 2});
      g.set("units", {50, 100});
      break;
    case Family::cnn_lstm:
      g.set("lstm_units", {50});
      break;
    case Family::xgb:
      g.set("n_estimators", {10, 50, 100});
      g.set("max_depth", {3, 5, 7});
      g.set("learning_rate", {0.01, 0.1, 0.2});
      g.set("subsample", {0.7, 0.9});
      g.set("colsample_bytree", {0.7, 0.9});
      g.set("gamma", {0.0, 0.1, 0.2});
      break;
  }
  return g;
}

const HyperGrid& effective_grid(const RunConfig& cfg, Family family,
                                HyperGrid& storage) {
  const auto it = cfg.grid_overrides.find(family_traits(family).name);
  if (it != cfg.grid_overrides.end()) return it->second;
  storage = default_grid(family);
  return storage;
}

}  // namespace wxbench
