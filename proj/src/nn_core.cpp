#include "wxbench/nn_core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "wxbench/errors.hpp"

namespace wxbench {

std::size_t ParamPack::add(const std::string& name, std::size_t rows,
                           std::size_t cols, bool penalized) {
  TensorDesc d;
  d.name = name;
  d.rows = rows;
  d.cols = cols;
  d.penalized = penalized;
  d.offset = theta_.size();
  theta_.resize(theta_.size() + rows * cols, 0.0);
  descs_.push_back(d);
  return descs_.size() - 1;
}

void ParamPack::allocate() { grad_.assign(theta_.size(), 0.0); }

void ParamPack::glorot_init(Rng& rng) {
  for (const auto& d : descs_) {
    if (!d.penalized) continue;  // biases start at zero
    const double limit =
        std::sqrt(6.0 / static_cast<double>(d.rows + d.cols));
    double* p = theta_.data() + d.offset;
    for (std::size_t i = 0; i < d.rows * d.cols; ++i)
      p[i] = rng.uniform(-limit, limit);
  }
}

double ParamPack::penalized_sq_norm() const {
  double s = 0.0;
  for (const auto& d : descs_) {
    if (!d.penalized) continue;
    const double* p = theta_.data() + d.offset;
    for (std::size_t i = 0; i < d.rows * d.cols; ++i) s += p[i] * p[i];
  }
  return s;
}

void ParamPack::add_penalty_grad(double scale) {
  for (const auto& d : descs_) {
    if (!d.penalized) continue;
    const double* p = theta_.data() + d.offset;
    double* g = grad_.data() + d.offset;
    for (std::size_t i = 0; i < d.rows * d.cols; ++i) g[i] += scale * p[i];
  }
}

void Adam::step(std::span<double> theta, std::span<const double> grad) {
  ++t_;
  const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (std::size_t i = 0; i < theta.size(); ++i) {
    m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * grad[i];
    v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * grad[i] * grad[i];
    const double mhat = m_[i] / bc1;
    const double vhat = v_[i] / bc2;
    theta[i] -= lr_ * mhat / (std::sqrt(vhat) + eps_);
  }
}

TrainResult train_with_early_stopping(
    std::vector<double>& theta, int max_epochs, int patience,
    const std::function<double(int)>& run_epoch,
    const std::function<double()>& validation_loss) {
  if (max_epochs < 1)
    throw InvalidParams("epoch budget must be >= 1, got " +
                        std::to_string(max_epochs));

  TrainResult res;
  std::vector<double> best_theta = theta;
  double best_val = std::numeric_limits<double>::infinity();
  int best_epoch = 0;

  for (int epoch = 1; epoch <= max_epochs; ++epoch) {
    const double train_loss = run_epoch(epoch);
    if (!std::isfinite(train_loss))
      throw DivergedLoss("training loss became non-finite at epoch " +
                         std::to_string(epoch));
    const double val = validation_loss();
    if (!std::isfinite(val))
      throw DivergedLoss("validation loss became non-finite at epoch " +
                         std::to_string(epoch));
    res.epochs_run = epoch;
    if (val < best_val) {
      best_val = val;
      best_epoch = epoch;
      best_theta = theta;
    } else if (epoch - best_epoch >= patience) {
      break;
    }
  }

  theta = best_theta;
  res.best_epoch = best_epoch;
  res.best_val_mse = best_val;
  return res;
}

}  // namespace wxbench
