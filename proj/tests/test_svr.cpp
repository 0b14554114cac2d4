#include <doctest.h>

#include <cmath>

#include "oracles/svr_oracle.hpp"
#include "wxbench/errors.hpp"
#include "wxbench/rng.hpp"
#include "wxbench/svr.hpp"

using namespace wxbench;

namespace {

ModelConfig svr_config(double c, double gamma, double eps) {
  ModelConfig cfg;
  cfg["C"] = c;
  cfg["gamma"] = gamma;
  cfg["epsilon"] = eps;
  return cfg;
}

Matrix random_inputs(Rng& rng, std::size_t n, std::size_t d) {
  Matrix x(n, d);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < d; ++c) x(r, c) = rng.uniform(-1.5, 1.5);
  return x;
}

Matrix gram(const Matrix& x, double gamma) {
  Matrix k(x.rows(), x.rows());
  for (std::size_t i = 0; i < x.rows(); ++i)
    for (std::size_t j = 0; j < x.rows(); ++j)
      k(i, j) = rbf_kernel(x.row(i), x.row(j), gamma);
  return k;
}

}  // namespace

TEST_CASE("rbf kernel closed forms") {
  const std::vector<double> a = {1.0, 2.0};
  const std::vector<double> b = {1.0, 2.0};
  CHECK(rbf_kernel(a, b, 0.7) == 1.0);

  const std::vector<double> c = {0.0};
  const std::vector<double> d = {1.0};
  CHECK(rbf_kernel(c, d, 1.0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-12));

  Rng rng(61);
  for (int rep = 0; rep < 50; ++rep) {
    std::vector<double> u(3), v(3);
    for (auto& t : u) t = rng.normal();
    for (auto& t : v) t = rng.normal();
    CHECK(rbf_kernel(u, v, 0.3) == rbf_kernel(v, u, 0.3));
  }

  const std::vector<double> wrong = {1.0, 2.0, 3.0};
  CHECK_THROWS_AS(rbf_kernel(a, wrong, 1.0), DimensionMismatch);
}

TEST_CASE("constant target gives zero coefficients and bias c") {
  Rng rng(62);
  const Matrix x = random_inputs(rng, 8, 2);
  Matrix y(8, 1, 3.25);
  SvrModel svr(svr_config(10.0, 0.5, 0.1));
  svr.fit(x, y, 0);
  CHECK(svr.converged());
  for (double b : svr.beta()) CHECK(b == 0.0);
  CHECK(svr.bias() == doctest::Approx(3.25).epsilon(1e-12));
  const Matrix p = svr.predict(x);
  for (std::size_t r = 0; r < 8; ++r)
    CHECK(p(r, 0) == doctest::Approx(3.25).epsilon(1e-12));
}

TEST_CASE("single training point predicts its own target") {
  Matrix x(1, 2);
  x(0, 0) = 0.4;
  x(0, 1) = -1.0;
  Matrix y(1, 1, -7.5);
  SvrModel svr(svr_config(1.0, 1.0, 0.1));
  svr.fit(x, y, 0);
  CHECK(svr.predict(x)(0, 0) == doctest::Approx(-7.5).epsilon(1e-9));
}

TEST_CASE("solver matches the brute-force QP on small instances") {
  int converged_count = 0;
  for (int rep = 0; rep < 12; ++rep) {
    Rng rng(derive_seed(600, rep));
    const std::size_t n = 3 + rng.uniform_int(5);  // 3..7
    const std::size_t d = 1 + rng.uniform_int(2);
    const double c_box = std::vector<double>{0.5, 1.0, 10.0}[rng.uniform_int(3)];
    const double gamma = std::vector<double>{0.1, 0.5, 1.0}[rng.uniform_int(3)];
    const double eps = std::vector<double>{0.01, 0.1, 0.2}[rng.uniform_int(3)];

    const Matrix x = random_inputs(rng, n, d);
    Matrix y(n, 1);
    for (std::size_t r = 0; r < n; ++r)
      y(r, 0) = std::sin(1.7 * x(r, 0)) + 0.3 * rng.normal();

    // a tight tolerance so the solver actually reaches the dual optimum the
    // brute-force reference computes; the production default (1e-3) governs
    // benchmark runs, not this correctness check
    ModelConfig cfg = svr_config(c_box, gamma, eps);
    cfg["kkt_tol"] = 1e-8;
    SvrModel svr(cfg);
    svr.fit(x, y, 0);
    REQUIRE(svr.converged());
    CHECK(svr.final_kkt_violation() < 1e-3);
    ++converged_count;

    const Matrix k = gram(x, gamma);
    const auto oracle_sol = oracle::svr_brute_force(k, y.col(0), c_box, eps);
    REQUIRE(oracle_sol.found);

    const double got = oracle::svr_dual_objective(k, y.col(0), svr.beta(), eps);
    CHECK(std::fabs(got - oracle_sol.objective) <= 1e-6);

    // predictions agree within 1e-3 on the training points
    const Matrix p = svr.predict(x);
    for (std::size_t r = 0; r < n; ++r) {
      double oracle_pred = oracle_sol.bias;
      for (std::size_t j = 0; j < n; ++j)
        oracle_pred += oracle_sol.beta[j] * k(r, j);
      CHECK(std::fabs(p(r, 0) - oracle_pred) <= 1e-3);
    }

    // coefficient invariants
    double beta_sum = 0.0;
    for (double b : svr.beta()) {
      CHECK(std::fabs(b) <= c_box + 1e-12);
      beta_sum += b;
    }
    CHECK(std::fabs(beta_sum) <= 1e-3);

    // zero-coefficient points sit inside the tube at convergence
    for (std::size_t r = 0; r < n; ++r)
      if (svr.beta()[r] == 0.0)
        CHECK(std::fabs(p(r, 0) - y(r, 0)) <= eps + 2e-3);
  }
  CHECK(converged_count == 12);
}

TEST_CASE("duplicated support point equals merged coefficient") {
  // two identical support vectors with coefficients a and b predict exactly
  // like one support vector with coefficient a+b
  nlohmann::json params = {{"C", 10.0}, {"gamma", 0.5}, {"epsilon", 0.1},
                           {"kkt_tol", 1e-3}, {"max_passes", 1000}};
  nlohmann::json two = {{"model", "svr"},
                        {"params", params},
                        {"beta", {0.3, 0.2}},
                        {"bias", 0.5},
                        {"converged", true},
                        {"support_x", {{1.0, 2.0}, {1.0, 2.0}}}};
  nlohmann::json one = {{"model", "svr"},
                        {"params", params},
                        {"beta", {0.5}},
                        {"bias", 0.5},
                        {"converged", true},
                        {"support_x", {{1.0, 2.0}}}};
  const SvrModel m2 = SvrModel::from_json(two);
  const SvrModel m1 = SvrModel::from_json(one);
  Rng rng(63);
  Matrix probe = random_inputs(rng, 10, 2);
  const Matrix p2 = m2.predict(probe), p1 = m1.predict(probe);
  for (std::size_t r = 0; r < 10; ++r)
    CHECK(p2(r, 0) == doctest::Approx(p1(r, 0)).epsilon(1e-15));
}

TEST_CASE("svr validates inputs") {
  SvrModel svr(svr_config(1.0, 0.5, 0.1));
  CHECK_THROWS_AS(svr.fit(Matrix(), Matrix(), 0), EmptyData);
  Matrix x(3, 2), y(3, 2);
  CHECK_THROWS_AS(svr.fit(x, y, 0), TargetCountMismatch);
  CHECK_THROWS_AS(SvrParams::from_config(svr_config(-1.0, 0.5, 0.1)),
                  InvalidParams);
}

TEST_CASE("non-convergence is flagged but still returns a model") {
  Rng rng(64);
  const Matrix x = random_inputs(rng, 30, 2);
  Matrix y(30, 1);
  for (std::size_t r = 0; r < 30; ++r) y(r, 0) = rng.normal() * 5.0;
  ModelConfig cfg = svr_config(100.0, 1.0, 0.01);
  cfg["max_passes"] = 3;  // far too few to converge
  SvrModel svr(cfg);
  svr.fit(x, y, 0);
  CHECK_FALSE(svr.converged());
  CHECK(svr.final_kkt_violation() >= 1e-3);
  CHECK_NOTHROW(svr.predict(x));
}

TEST_CASE("svr serialization round-trip") {
  Rng rng(65);
  const Matrix x = random_inputs(rng, 12, 2);
  Matrix y(12, 1);
  for (std::size_t r = 0; r < 12; ++r) y(r, 0) = std::sin(x(r, 0)) * 2.0;
  SvrModel svr(svr_config(10.0, 0.5, 0.05));
  svr.fit(x, y, 0);
  const SvrModel back = SvrModel::from_json(svr.to_json());
  const Matrix probe = random_inputs(rng, 9, 2);
  const Matrix p1 = svr.predict(probe), p2 = back.predict(probe);
  for (std::size_t r = 0; r < 9; ++r) CHECK(p1(r, 0) == p2(r, 0));
}
