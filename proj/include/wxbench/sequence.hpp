#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "wxbench/features.hpp"
#include "wxbench/matrix.hpp"
#include "wxbench/model.hpp"
#include "wxbench/nn_core.hpp"

namespace wxbench {

// Sliding-window samples: x is sample-major [sample][timestep][channel] over
// the 7 raw variables; y holds (temp, humidity) at the target hour, which is
// the hour right after the window.
struct SequenceBatch {
  std::size_t n_samples = 0;
  std::size_t window = 0;
  std::size_t channels = 0;
  std::vector<double> x;
  Matrix y;  // n x 2
  std::vector<Timestamp> origins;

  const double* sample(std::size_t i) const {
    return x.data() + i * window * channels;
  }
  SequenceBatch slice(std::size_t begin, std::size_t end) const;
};

// One sample per target hour t in [window, n): the window covers rows
// t-window .. t-1.
SequenceBatch build_windows(const Matrix& series,
                            const std::vector<Timestamp>& timestamps,
                            std::size_t window);

std::pair<SequenceBatch, SequenceBatch> chronological_split(
    const SequenceBatch& batch, double ratio);

// Stack of LSTM layers with sigmoid gates and a configurable cell
// activation (rectifier here): per step
//   i,f,o = sigmoid(x W + h U + b), g = act(...),
//   c = f.c + i.g, h = o.act(c).
// Parameters live in an external ParamPack so nets can compose the stack
// with other pieces (dense head, conv front).
class LstmStack {
 public:
  LstmStack() = default;
  void build(ParamPack& pack, std::size_t in_channels, std::size_t units,
             std::size_t layers, const std::string& prefix);

  // x: batch-major [b][t][c] flat; returns the last hidden state (B x units).
  // When `caches` is null only O(B*units) state is kept.
  struct Cache;
  Matrix forward(const ParamPack& pack, const double* x, std::size_t batch,
                 std::size_t steps, Cache* caches) const;

  // d_last_h: gradient on the final hidden state. Returns the gradient on
  // the input sequence (same layout as x) when dx is non-null.
  void backward(ParamPack& pack, const Cache& cache, const Matrix& d_last_h,
                std::vector<double>* dx) const;

  std::size_t units() const { return units_; }
  std::size_t layers() const { return layers_; }
  std::size_t in_channels() const { return in_channels_; }

  struct Cache {
    std::size_t batch = 0, steps = 0;
    // per layer: gates (T*B*4u), cells (T*B*u), act_c (T*B*u), h ((T+1)*B*u)
    std::vector<std::vector<double>> gates, cells, act_c, h;
    const double* input = nullptr;  // borrowed pointer to the forward input
  };

 private:
  std::size_t in_channels_ = 0, units_ = 0, layers_ = 0;
  std::vector<std::size_t> wx_, wh_, b_;  // pack indices per layer
};

struct LstmNetParams {
  int layers = 1;
  int units = 50;
  std::size_t window = 24;
  TrainOpts train;

  static LstmNetParams from_config(const ModelConfig& cfg);
  nlohmann::json to_json() const;
};

struct CnnLstmNetParams {
  int filters = 32;
  int kernel = 3;
  int lstm_units = 50;
  std::size_t window = 24;
  TrainOpts train;

  static CnnLstmNetParams from_config(const ModelConfig& cfg);
  nlohmann::json to_json() const;
};

// Common surface of the two recurrent regressors. Inputs are standardized
// with channel statistics fitted on training-known rows; predictions are
// mapped back to natural units through the target channels' statistics.
class SequenceModel {
 public:
  virtual ~SequenceModel() = default;
  virtual void fit(const SequenceBatch& train, const Standardizer& channel_stats,
                   std::uint64_t seed) = 0;
  virtual Matrix predict(const SequenceBatch& batch) const = 0;
  virtual nlohmann::json to_json() const = 0;
};

class LstmNet : public SequenceModel {
 public:
  explicit LstmNet(LstmNetParams params) : params_(std::move(params)) {}
  explicit LstmNet(const ModelConfig& cfg)
      : LstmNet(LstmNetParams::from_config(cfg)) {}

  void fit(const SequenceBatch& train, const Standardizer& channel_stats,
           std::uint64_t seed) override;
  Matrix predict(const SequenceBatch& batch) const override;
  nlohmann::json to_json() const override;
  static LstmNet from_json(const nlohmann::json& j);

  void init_network(std::size_t channels, std::uint64_t seed);
  // standardized-space loss over a flat [b][t][c] batch, gradient in pack()
  double loss_and_grad(const double* xb, std::size_t batch, std::size_t steps,
                       const Matrix& yb);
  Matrix forward_std(const double* xb, std::size_t batch, std::size_t steps) const;
  ParamPack& pack() { return pack_; }
  const TrainResult& train_result() const { return train_result_; }
  const LstmNetParams& params() const { return params_; }
  void set_channel_stats(const Standardizer& s) { stats_ = s; }

 private:
  LstmNetParams params_;
  ParamPack pack_;
  LstmStack stack_;
  std::size_t head_w_ = 0, head_b_ = 0;
  std::size_t channels_ = 0;
  Standardizer stats_;
  TrainResult train_result_;
  std::uint64_t seed_ = 0;
};

class CnnLstmNet : public SequenceModel {
 public:
  explicit CnnLstmNet(CnnLstmNetParams params) : params_(std::move(params)) {}
  explicit CnnLstmNet(const ModelConfig& cfg)
      : CnnLstmNet(CnnLstmNetParams::from_config(cfg)) {}

  void fit(const SequenceBatch& train, const Standardizer& channel_stats,
           std::uint64_t seed) override;
  Matrix predict(const SequenceBatch& batch) const override;
  nlohmann::json to_json() const override;
  static CnnLstmNet from_json(const nlohmann::json& j);

  void init_network(std::size_t channels, std::size_t window,
                    std::uint64_t seed);
  double loss_and_grad(const double* xb, std::size_t batch, const Matrix& yb);
  Matrix forward_std(const double* xb, std::size_t batch) const;
  ParamPack& pack() { return pack_; }
  const TrainResult& train_result() const { return train_result_; }
  const CnnLstmNetParams& params() const { return params_; }
  void set_channel_stats(const Standardizer& s) { stats_ = s; }

 private:
  CnnLstmNetParams params_;
  ParamPack pack_;
  LstmStack stack_;
  std::size_t conv_w_ = 0, conv_b_ = 0, head_w_ = 0, head_b_ = 0;
  std::size_t channels_ = 0, window_ = 0;
  Standardizer stats_;
  TrainResult train_result_;
  std::uint64_t seed_ = 0;
};

// Valid 1-D convolution over [b][t][c] input: output length
// steps - kernel + 1, rectifier applied. Exposed for direct testing.
// w is (kernel*channels) x filters, b has `filters` entries.
void conv1d_forward(const double* x, std::size_t batch, std::size_t steps,
                    std::size_t channels, const double* w, const double* b,
                    std::size_t kernel, std::size_t filters, double* out);

}  // namespace wxbench
