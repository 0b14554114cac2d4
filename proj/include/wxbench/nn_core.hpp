#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "wxbench/rng.hpp"

namespace wxbench {

// One named tensor inside a flat parameter vector. `penalized` marks weight
// matrices that take part in the L2 term (biases never do).
struct TensorDesc {
  std::string name;
  std::size_t offset = 0;
  std::size_t rows = 0;
  std::size_t cols = 0;
  bool penalized = false;
};

// Flat parameter/gradient storage: one contiguous theta vector makes Adam,
// finite-difference checks, snapshot/restore and serialization trivial.
class ParamPack {
 public:
  std::size_t add(const std::string& name, std::size_t rows, std::size_t cols,
                  bool penalized);
  void allocate();

  double* param(std::size_t idx) { return theta_.data() + descs_[idx].offset; }
  const double* param(std::size_t idx) const {
    return theta_.data() + descs_[idx].offset;
  }
  double* grad(std::size_t idx) { return grad_.data() + descs_[idx].offset; }

  std::vector<double>& theta() { return theta_; }
  const std::vector<double>& theta() const { return theta_; }
  std::vector<double>& grads() { return grad_; }
  void zero_grads() { std::fill(grad_.begin(), grad_.end(), 0.0); }

  const std::vector<TensorDesc>& descs() const { return descs_; }
  std::size_t size() const { return theta_.size(); }

  // seeded Glorot-uniform init on weight tensors, zero biases
  void glorot_init(Rng& rng);

  // sum of squares over penalized tensors
  double penalized_sq_norm() const;
  // grad += scale * theta on penalized tensors
  void add_penalty_grad(double scale);

 private:
  std::vector<TensorDesc> descs_;
  std::vector<double> theta_;
  std::vector<double> grad_;
};

class Adam {
 public:
  Adam(std::size_t n_params, double lr, double beta1 = 0.9, double beta2 = 0.999,
       double eps = 1e-8)
      : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps), m_(n_params, 0.0),
        v_(n_params, 0.0) {}

  void step(std::span<double> theta, std::span<const double> grad);

 private:
  double lr_, beta1_, beta2_, eps_;
  std::vector<double> m_, v_;
  std::int64_t t_ = 0;
};

struct TrainOpts {
  double learning_rate = 0.001;
  int batch_size = 32;
  int max_epochs = 100;
  int patience = 10;
  double validation_fraction = 0.1;  // chronological tail
};

struct TrainResult {
  int epochs_run = 0;
  int best_epoch = 0;       // 1-based
  double best_val_mse = 0;  // loss of the restored weights
};

// Shared early-stopping driver. Runs `run_epoch(epoch)` (which returns the
// epoch's training loss, checked for divergence), then `validation_loss()`;
// snapshots theta on improvement and restores the best snapshot at the end.
// Training stops after `patience` consecutive epochs without improvement.
TrainResult train_with_early_stopping(
    std::vector<double>& theta, int max_epochs, int patience,
    const std::function<double(int)>& run_epoch,
    const std::function<double()>& validation_loss);

inline double relu(double x) { return x > 0.0 ? x : 0.0; }
inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace wxbench
