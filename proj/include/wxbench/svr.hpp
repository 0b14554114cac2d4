#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "wxbench/model.hpp"

namespace wxbench {

struct SvrParams {
  double c = 1.0;
  double rbf_gamma = 0.1;
  double epsilon = 0.1;       // insensitive-tube half width
  double kkt_tol = 1e-3;
  std::size_t max_passes = 200000;  // pairwise update cap

  static SvrParams from_config(const ModelConfig& cfg);
  nlohmann::json to_json() const;
};

double rbf_kernel(std::span<const double> a, std::span<const double> b,
                  double gamma);

// Epsilon-insensitive support vector regression with an RBF kernel, solved
// in the dual by SMO-style maximal-violating-pair updates. beta_i = alpha_i
// - alpha*_i; f(x) = sum_i beta_i K(x_i, x) + b.
class SvrModel : public TabularModel {
 public:
  explicit SvrModel(SvrParams params) : params_(params) {}
  explicit SvrModel(const ModelConfig& cfg)
      : SvrModel(SvrParams::from_config(cfg)) {}

  void fit(const Matrix& x, const Matrix& y, std::uint64_t seed) override;
  Matrix predict(const Matrix& x) const override;
  nlohmann::json to_json() const override;
  static SvrModel from_json(const nlohmann::json& j);

  // Precomputed squared-distance Gram of the training rows (upper triangle
  // unused entries included; symmetric). Lets grid-search cells share the
  // O(n^2 d) distance work across gamma values.
  void set_distance_cache(std::shared_ptr<const Matrix> sq_dists) {
    sq_dist_cache_ = std::move(sq_dists);
  }

  bool converged() const { return converged_; }
  double final_kkt_violation() const { return final_kkt_violation_; }
  double bias() const { return bias_; }
  const std::vector<double>& beta() const { return beta_; }
  const SvrParams& params() const { return params_; }

 private:
  SvrParams params_;
  Matrix support_x_;           // retained training inputs
  std::vector<double> beta_;
  double bias_ = 0.0;
  bool converged_ = false;
  double final_kkt_violation_ = 0.0;
  std::shared_ptr<const Matrix> sq_dist_cache_;
};

}  // namespace wxbench
