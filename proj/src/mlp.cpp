#include "wxbench/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "wxbench/errors.hpp"
#include "wxbench/linalg.hpp"

namespace wxbench {

MlpParams MlpParams::from_config(const ModelConfig& cfg) {
  MlpParams p;
  if (cfg.contains("hidden_layers"))
    p.hidden_layers = cfg["hidden_layers"].get<std::vector<int>>();
  if (cfg.contains("alpha")) p.alpha = cfg["alpha"].get<double>();
  if (cfg.contains("learning_rate"))
    p.learning_rate = cfg["learning_rate"].get<double>();
  if (cfg.contains("max_iter")) p.max_iter = cfg["max_iter"].get<int>();
  if (cfg.contains("patience")) p.patience = cfg["patience"].get<int>();
  if (cfg.contains("batch_size")) p.batch_size = cfg["batch_size"].get<int>();
  if (p.hidden_layers.empty())
    throw InvalidParams("hidden_layers must be non-empty");
  for (int w : p.hidden_layers)
    if (w < 1) throw InvalidParams("hidden layer widths must be >= 1");
  if (p.alpha < 0.0) throw InvalidParams("alpha must be >= 0");
  if (!(p.learning_rate > 0.0)) throw InvalidParams("learning_rate must be > 0");
  return p;
}

nlohmann::json MlpParams::to_json() const {
  return {{"hidden_layers", hidden_layers},
          {"alpha", alpha},
          {"learning_rate", learning_rate},
          {"max_iter", max_iter},
          {"patience", patience},
          {"batch_size", batch_size}};
}

void Mlp::init_network(std::size_t n_inputs, std::size_t n_outputs,
                       std::uint64_t seed) {
  seed_ = seed;
  n_inputs_ = n_inputs;
  n_outputs_ = n_outputs;
  pack_ = ParamPack();
  w_idx_.clear();
  b_idx_.clear();

  std::size_t prev = n_inputs;
  for (std::size_t l = 0; l < params_.hidden_layers.size(); ++l) {
    const auto width = static_cast<std::size_t>(params_.hidden_layers[l]);
    w_idx_.push_back(pack_.add("w" + std::to_string(l), prev, width, true));
    b_idx_.push_back(pack_.add("b" + std::to_string(l), 1, width, false));
    prev = width;
  }
  w_idx_.push_back(pack_.add("w_out", prev, n_outputs, true));
  b_idx_.push_back(pack_.add("b_out", 1, n_outputs, false));
  pack_.allocate();

  Rng rng(derive_seed(seed, fnv1a64("mlp_init")));
  pack_.glorot_init(rng);
}

Matrix Mlp::forward(const Matrix& x, std::vector<Matrix>* activations) const {
  const std::size_t n_layers = w_idx_.size();
  Matrix h = x;
  if (activations) activations->push_back(h);
  for (std::size_t l = 0; l < n_layers; ++l) {
    const auto& wd = pack_.descs()[w_idx_[l]];
    Matrix a(h.rows(), wd.cols);
    const double* b = pack_.param(b_idx_[l]);
    for (std::size_t r = 0; r < a.rows(); ++r)
      for (std::size_t c = 0; c < wd.cols; ++c) a(r, c) = b[c];
    linalg::gemm(h.data(), pack_.param(w_idx_[l]), a.data(), h.rows(), wd.rows,
                 wd.cols);
    if (l + 1 < n_layers)
      for (std::size_t i = 0; i < a.rows() * a.cols(); ++i)
        a.data()[i] = relu(a.data()[i]);
    h = std::move(a);
    if (activations && l + 1 < n_layers) activations->push_back(h);
  }
  return h;
}

double Mlp::loss_and_grad(const Matrix& xb, const Matrix& yb) {
  const std::size_t batch = xb.rows();
  const std::size_t m = yb.cols();
  pack_.zero_grads();

  std::vector<Matrix> acts;  // inputs of each layer (post-activation)
  Matrix out = forward(xb, &acts);

  // data term: mean over batch and targets of squared residuals
  double sse = 0.0;
  Matrix delta(batch, m);
  for (std::size_t r = 0; r < batch; ++r)
    for (std::size_t c = 0; c < m; ++c) {
      const double res = out(r, c) - yb(r, c);
      sse += res * res;
      delta(r, c) = 2.0 * res / static_cast<double>(batch * m);
    }
  double loss = sse / static_cast<double>(batch * m);

  // backward through the layer stack
  for (std::size_t l = w_idx_.size(); l-- > 0;) {
    const auto& wd = pack_.descs()[w_idx_[l]];
    const Matrix& input = acts[l];
    // dW += input^T delta ; db += column sums
    linalg::gemm_ta(input.data(), delta.data(), pack_.grad(w_idx_[l]),
                    wd.rows, batch, wd.cols);
    double* db = pack_.grad(b_idx_[l]);
    for (std::size_t r = 0; r < batch; ++r)
      for (std::size_t c = 0; c < wd.cols; ++c) db[c] += delta(r, c);
    if (l == 0) break;
    Matrix prev_delta(batch, wd.rows);
    linalg::gemm_tb(delta.data(), pack_.param(w_idx_[l]), prev_delta.data(),
                    batch, wd.cols, wd.rows);
    // rectifier derivative via the stored post-activation
    for (std::size_t r = 0; r < batch; ++r)
      for (std::size_t c = 0; c < wd.rows; ++c)
        if (input(r, c) <= 0.0) prev_delta(r, c) = 0.0;
    delta = std::move(prev_delta);
  }

  // L2 penalty scaled by batch size, biases excluded
  if (params_.alpha > 0.0) {
    loss += params_.alpha / (2.0 * static_cast<double>(batch)) *
            pack_.penalized_sq_norm();
    pack_.add_penalty_grad(params_.alpha / static_cast<double>(batch));
  }
  return loss;
}

void Mlp::fit(const Matrix& x, const Matrix& y, std::uint64_t seed) {
  const std::size_t n = x.rows();
  if (n == 0) throw EmptyData("MLP needs data");
  if (params_.max_iter < 1)
    throw InvalidParams("max_iter must be >= 1 for training");

  init_network(x.cols(), y.cols(), seed);

  // chronological validation tail
  const auto n_val = std::max<std::size_t>(
      1, static_cast<std::size_t>(params_.validation_fraction *
                                  static_cast<double>(n)));
  if (n <= n_val || n - n_val < 2)
    throw EmptyData("too few rows after carving the validation tail");
  const std::size_t n_fit = n - n_val;

  Matrix val_x = x.slice_rows(n_fit, n);
  Matrix val_y = y.slice_rows(n_fit, n);

  Adam adam(pack_.size(), params_.learning_rate);
  std::vector<std::size_t> order(n_fit);
  std::iota(order.begin(), order.end(), 0);
  Rng shuffle_rng(derive_seed(seed, fnv1a64("mlp_shuffle")));
  const auto batch_size = static_cast<std::size_t>(params_.batch_size);

  auto run_epoch = [&](int) {
    shuffle_rng.shuffle(order);
    double total = 0.0;
    std::size_t seen = 0;
    for (std::size_t start = 0; start < n_fit; start += batch_size) {
      const std::size_t bsz = std::min(batch_size, n_fit - start);
      Matrix xb(bsz, x.cols()), yb(bsz, y.cols());
      for (std::size_t i = 0; i < bsz; ++i) {
        const std::size_t src = order[start + i];
        for (std::size_t c = 0; c < x.cols(); ++c) xb(i, c) = x(src, c);
        for (std::size_t c = 0; c < y.cols(); ++c) yb(i, c) = y(src, c);
      }
      total += loss_and_grad(xb, yb) * static_cast<double>(bsz);
      seen += bsz;
      adam.step(pack_.theta(), pack_.grads());
    }
    return total / static_cast<double>(seen);
  };

  auto validation_mse = [&]() {
    Matrix pred = forward(val_x, nullptr);
    double sse = 0.0;
    for (std::size_t r = 0; r < pred.rows(); ++r)
      for (std::size_t c = 0; c < pred.cols(); ++c) {
        const double res = pred(r, c) - val_y(r, c);
        sse += res * res;
      }
    return sse / static_cast<double>(pred.rows() * pred.cols());
  };

  train_result_ = train_with_early_stopping(
      pack_.theta(), params_.max_iter, params_.patience, run_epoch,
      validation_mse);
}

Matrix Mlp::predict(const Matrix& x) const {
  if (pack_.size() == 0) throw InvalidParams("predict before fit");
  if (x.cols() != n_inputs_)
    throw DimensionMismatch("MLP fitted on " + std::to_string(n_inputs_) +
                            " inputs, got " + std::to_string(x.cols()));
  return forward(x, nullptr);
}

nlohmann::json Mlp::to_json() const {
  return {{"model", "mlp"},
          {"params", params_.to_json()},
          {"seed", seed_},
          {"n_inputs", n_inputs_},
          {"n_outputs", n_outputs_},
          {"theta", pack_.theta()}};
}

Mlp Mlp::from_json(const nlohmann::json& j) {
  Mlp m(MlpParams::from_config(j.at("params")));
  m.init_network(j.at("n_inputs").get<std::size_t>(),
                 j.at("n_outputs").get<std::size_t>(),
                 j.at("seed").get<std::uint64_t>());
  m.pack_.theta() = j.at("theta").get<std::vector<double>>();
  return m;
}

}  // namespace wxbench
