#include <doctest.h>

#include <cmath>

#include "oracles/gradcheck.hpp"
#include "wxbench/errors.hpp"
#include "wxbench/mlp.hpp"
#include "wxbench/rng.hpp"

using namespace wxbench;

namespace {

ModelConfig mlp_config(const std::vector<int>& hidden, double alpha,
                       double lr, int max_iter = 1500) {
  ModelConfig cfg;
  cfg["hidden_layers"] = hidden;
  cfg["alpha"] = alpha;
  cfg["learning_rate"] = lr;
  cfg["max_iter"] = max_iter;
  return cfg;
}

}  // namespace

TEST_CASE("zero network outputs zero; output bias passes through") {
  Mlp mlp(mlp_config({4}, 0.0, 0.001));
  mlp.init_network(3, 2, 1);
  std::fill(mlp.pack().theta().begin(), mlp.pack().theta().end(), 0.0);
  Matrix x(5, 3);
  Rng rng(71);
  for (std::size_t r = 0; r < 5; ++r)
    for (std::size_t c = 0; c < 3; ++c) x(r, c) = rng.normal();
  Matrix p = mlp.predict(x);
  for (std::size_t r = 0; r < 5; ++r)
    for (std::size_t c = 0; c < 2; ++c) CHECK(p(r, c) == 0.0);

  // output bias only: constant (a, b)
  const auto& descs = mlp.pack().descs();
  for (std::size_t i = 0; i < descs.size(); ++i) {
    if (descs[i].name == "b_out") {
      mlp.pack().param(i)[0] = 2.5;
      mlp.pack().param(i)[1] = -1.5;
    }
  }
  p = mlp.predict(x);
  for (std::size_t r = 0; r < 5; ++r) {
    CHECK(p(r, 0) == 2.5);
    CHECK(p(r, 1) == -1.5);
  }
}

TEST_CASE("gradient check on a random [4]-hidden instance") {
  Mlp mlp(mlp_config({4}, 0.001, 0.001));
  mlp.init_network(3, 2, 17);

  Rng rng(72);
  Matrix x(5, 3), y(5, 2);
  for (std::size_t r = 0; r < 5; ++r) {
    for (std::size_t c = 0; c < 3; ++c) x(r, c) = rng.normal();
    for (std::size_t c = 0; c < 2; ++c) y(r, c) = rng.normal();
  }

  mlp.loss_and_grad(x, y);
  const std::vector<double> analytic = mlp.pack().grads();
  const auto res = oracle::gradient_check(
      mlp.pack().theta(), analytic,
      [&]() {
        Mlp probe = mlp;  // loss must not disturb the checked gradient
        return probe.loss_and_grad(x, y);
      });
  CHECK(res.max_rel_error < 1e-5);
}

TEST_CASE("gradient check across every grid shape at reduced width") {
  const std::vector<std::vector<int>> shapes = {{4}, {5}, {4, 4}, {5, 5}};
  for (const auto& shape : shapes) {
    Mlp mlp(mlp_config(shape, 0.0005, 0.001));
    mlp.init_network(4, 2, 23 + shape.size());
    Rng rng(73 + shape[0]);
    Matrix x(6, 4), y(6, 2);
    for (std::size_t r = 0; r < 6; ++r) {
      for (std::size_t c = 0; c < 4; ++c) x(r, c) = rng.normal();
      for (std::size_t c = 0; c < 2; ++c) y(r, c) = rng.normal();
    }
    mlp.loss_and_grad(x, y);
    const std::vector<double> analytic = mlp.pack().grads();
    const auto res = oracle::gradient_check(
        mlp.pack().theta(), analytic,
        [&]() {
          Mlp probe = mlp;
          return probe.loss_and_grad(x, y);
        });
    CHECK(res.max_rel_error < 1e-5);
  }
}

TEST_CASE("mlp learns a linear map") {
  Rng rng(74);
  Matrix x(200, 2), y(200, 2);
  for (std::size_t r = 0; r < 200; ++r) {
    x(r, 0) = rng.uniform(-1, 1);
    x(r, 1) = rng.uniform(-1, 1);
    y(r, 0) = 2.0 * x(r, 0);
    y(r, 1) = -1.0 * x(r, 1) + 0.5;
  }
  Mlp mlp(mlp_config({16}, 0.0, 0.01, 400));
  mlp.fit(x, y, 5);
  const Matrix p = mlp.predict(x);
  double mse = 0.0;
  for (std::size_t r = 0; r < 200; ++r)
    for (std::size_t c = 0; c < 2; ++c) {
      const double d = p(r, c) - y(r, c);
      mse += d * d;
    }
  mse /= 400.0;
  CHECK(mse < 1e-3);
}

TEST_CASE("max_iter 0 is rejected") {
  Mlp mlp(mlp_config({8}, 0.0, 0.001, 0));
  Matrix x(30, 2), y(30, 2);
  CHECK_THROWS_AS(mlp.fit(x, y, 1), InvalidParams);
}

TEST_CASE("early stopping halts within best+patience and restores best weights") {
  Rng rng(75);
  Matrix x(120, 2), y(120, 2);
  for (std::size_t r = 0; r < 120; ++r) {
    x(r, 0) = rng.uniform(-1, 1);
    x(r, 1) = rng.uniform(-1, 1);
    y(r, 0) = x(r, 0) + 0.3 * rng.normal();
    y(r, 1) = x(r, 1) + 0.3 * rng.normal();
  }
  Mlp mlp(mlp_config({8}, 0.0, 0.01, 1500));
  mlp.fit(x, y, 9);
  const auto& res = mlp.train_result();
  CHECK(res.epochs_run <= res.best_epoch + mlp.params().patience);
  CHECK(res.best_epoch >= 1);

  // restored weights reproduce the recorded best validation loss
  const std::size_t n_val = 12;
  const Matrix vx = x.slice_rows(120 - n_val, 120);
  const Matrix vy = y.slice_rows(120 - n_val, 120);
  const Matrix p = mlp.predict(vx);
  double mse = 0.0;
  for (std::size_t r = 0; r < n_val; ++r)
    for (std::size_t c = 0; c < 2; ++c) {
      const double d = p(r, c) - vy(r, c);
      mse += d * d;
    }
  mse /= static_cast<double>(n_val * 2);
  CHECK(mse == doctest::Approx(res.best_val_mse).epsilon(1e-9));
}

TEST_CASE("first-epoch loss decreases for a small learning rate") {
  Rng rng(76);
  Matrix x(64, 3), y(64, 2);
  for (std::size_t r = 0; r < 64; ++r) {
    for (std::size_t c = 0; c < 3; ++c) x(r, c) = rng.normal();
    y(r, 0) = x(r, 0) * 1.5;
    y(r, 1) = x(r, 1) - x(r, 2);
  }
  Mlp a(mlp_config({8}, 0.0, 0.002, 1));
  a.fit(x, y, 4);
  Mlp b(mlp_config({8}, 0.0, 0.002, 12));
  b.fit(x, y, 4);
  // more epochs should not leave a worse best validation loss
  CHECK(b.train_result().best_val_mse <=
        a.train_result().best_val_mse + 1e-12);
}

TEST_CASE("mlp serialization round-trip is exact") {
  Rng rng(77);
  Matrix x(60, 3), y(60, 2);
  for (std::size_t r = 0; r < 60; ++r) {
    for (std::size_t c = 0; c < 3; ++c) x(r, c) = rng.normal();
    y(r, 0) = x(r, 0);
    y(r, 1) = x(r, 1);
  }
  Mlp mlp(mlp_config({6}, 0.001, 0.005, 40));
  mlp.fit(x, y, 2);
  const Mlp back = Mlp::from_json(mlp.to_json());
  const Matrix p1 = mlp.predict(x), p2 = back.predict(x);
  for (std::size_t r = 0; r < 60; ++r)
    for (std::size_t c = 0; c < 2; ++c) CHECK(p1(r, c) == p2(r, c));
}
