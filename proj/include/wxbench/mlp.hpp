#pragma once

#include <cstdint>
#include <vector>

#include "wxbench/model.hpp"
#include "wxbench/nn_core.hpp"

namespace wxbench {

struct MlpParams {
  std::vector<int> hidden_layers = {100};
  double alpha = 0.001;  // L2 coefficient on weights
  double learning_rate = 0.001;
  int max_iter = 1500;  // epoch cap
  int patience = 10;
  double validation_fraction = 0.1;
  int batch_size = 32;

  static MlpParams from_config(const ModelConfig& cfg);
  nlohmann::json to_json() const;
};

// Feed-forward net: rectifier hidden layers, linear output. Trained with
// mini-batch Adam on
//   loss = mean_{batch,targets}(r^2) + alpha/(2*batch) * sum ||W||^2
// and patience-based early stopping on the chronological 10% tail of the
// training rows; the best-validation weights are restored.
class Mlp : public TabularModel {
 public:
  explicit Mlp(MlpParams params) : params_(std::move(params)) {}
  explicit Mlp(const ModelConfig& cfg) : Mlp(MlpParams::from_config(cfg)) {}

  void fit(const Matrix& x, const Matrix& y, std::uint64_t seed) override;
  Matrix predict(const Matrix& x) const override;
  nlohmann::json to_json() const override;
  static Mlp from_json(const nlohmann::json& j);

  // test access: builds the network without training so weights can be set
  // directly, and exposes loss/gradient for finite-difference checks
  void init_network(std::size_t n_inputs, std::size_t n_outputs,
                    std::uint64_t seed);
  double loss_and_grad(const Matrix& xb, const Matrix& yb);
  ParamPack& pack() { return pack_; }
  const TrainResult& train_result() const { return train_result_; }
  const MlpParams& params() const { return params_; }

 private:
  Matrix forward(const Matrix& x, std::vector<Matrix>* activations) const;

  MlpParams params_;
  ParamPack pack_;
  std::vector<std::size_t> w_idx_, b_idx_;  // per layer
  std::size_t n_inputs_ = 0, n_outputs_ = 0;
  TrainResult train_result_;
  std::uint64_t seed_ = 0;
};

}  // namespace wxbench
