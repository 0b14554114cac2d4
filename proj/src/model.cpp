#include "wxbench/model.hpp"

#include "wxbench/errors.hpp"
#include "wxbench/rng.hpp"

namespace wxbench {

namespace {
const std::vector<FamilyTraits> kTraits = {
    {Family::svr, "svr", false, false, true},
    {Family::mlp, "mlp", true, false, true},
    {Family::rf, "rf", true, false, false},
    {Family::dt, "dt", true, false, false},
    {Family::lstm, "lstm", true, true, true},
    {Family::cnn_lstm, "cnn_lstm", true, true, true},
    {Family::xgb, "xgb", false, false, false},
};
}  // namespace

const FamilyTraits& family_traits(Family f) {
  return kTraits[static_cast<int>(f)];
}

Family family_from_name(const std::string& name) {
  for (const auto& t : kTraits)
    if (t.name == name) return t.family;
  throw InvalidParams("unknown model family '" + name +
                      "'; valid families: " + valid_family_names());
}

const std::vector<Family>& all_families() {
  static const std::vector<Family> fams = [] {
    std::vector<Family> v;
    for (const auto& t : kTraits) v.push_back(t.family);
    return v;
  }();
  return fams;
}

std::string valid_family_names() {
  std::string out;
  for (const auto& t : kTraits) {
    if (!out.empty()) out += ",";
    out += t.name;
  }
  return out;
}

void HyperGrid::set(const std::string& param,
                    std::vector<nlohmann::json> values) {
  if (values.empty())
    throw InvalidParams("parameter '" + param + "' has an empty value list");
  values_[param] = std::move(values);
}

std::size_t HyperGrid::config_count() const {
  std::size_t n = 1;
  for (const auto& [k, v] : values_) n *= v.size();
  return n;
}

ModelConfig HyperGrid::config_at(std::size_t index) const {
  // parameter names are map-ordered (sorted); the last one cycles fastest
  ModelConfig cfg = nlohmann::json::object();
  std::size_t radix = config_count();
  std::size_t rem = index;
  for (const auto& [name, vals] : values_) {
    radix /= vals.size();
    cfg[name] = vals[rem / radix];
    rem %= radix;
  }
  return cfg;
}

std::vector<ModelConfig> HyperGrid::enumerate() const {
  std::vector<ModelConfig> out;
  const std::size_t n = config_count();
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(config_at(i));
  return out;
}

MultiOutputWrapper::MultiOutputWrapper(SingleTargetFactory factory,
                                       ModelConfig config)
    : factory_(std::move(factory)), config_(std::move(config)) {}

MultiOutputWrapper MultiOutputWrapper::from_parts(
    ModelConfig config, std::vector<std::unique_ptr<TabularModel>> parts) {
  MultiOutputWrapper w(nullptr, std::move(config));
  w.parts_ = std::move(parts);
  return w;
}

std::uint64_t MultiOutputWrapper::target_seed(std::uint64_t seed,
                                              std::size_t target) {
  return derive_seed(seed, fnv1a64("target"), target);
}

void MultiOutputWrapper::fit(const Matrix& x, const Matrix& y,
                             std::uint64_t seed) {
  if (!factory_)
    throw InvalidParams("a deserialized wrapper cannot be refitted");
  if (y.cols() == 0) throw TargetCountMismatch("Y has no columns");
  parts_.clear();
  for (std::size_t t = 0; t < y.cols(); ++t) {
    Matrix yt(y.rows(), 1);
    for (std::size_t r = 0; r < y.rows(); ++r) yt(r, 0) = y(r, t);
    auto part = factory_(config_);
    part->fit(x, yt, target_seed(seed, t));
    parts_.push_back(std::move(part));
  }
}

Matrix MultiOutputWrapper::predict(const Matrix& x) const {
  if (parts_.empty()) throw InvalidParams("predict before fit");
  Matrix out(x.rows(), parts_.size());
  for (std::size_t t = 0; t < parts_.size(); ++t) {
    Matrix p = parts_[t]->predict(x);
    for (std::size_t r = 0; r < x.rows(); ++r) out(r, t) = p(r, 0);
  }
  return out;
}

nlohmann::json MultiOutputWrapper::to_json() const {
  nlohmann::json j;
  j["wrapper"] = "multi_output";
  j["config"] = config_;
  j["parts"] = nlohmann::json::array();
  for (const auto& p : parts_) j["parts"].push_back(p->to_json());
  return j;
}

}  // namespace wxbench
