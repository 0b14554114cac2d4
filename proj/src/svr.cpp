#include "wxbench/svr.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "wxbench/errors.hpp"
#include "wxbench/linalg.hpp"

namespace wxbench {

SvrParams SvrParams::from_config(const ModelConfig& cfg) {
  SvrParams p;
  if (cfg.contains("C")) p.c = cfg["C"].get<double>();
  if (cfg.contains("gamma")) p.rbf_gamma = cfg["gamma"].get<double>();
  if (cfg.contains("epsilon")) p.epsilon = cfg["epsilon"].get<double>();
  if (cfg.contains("kkt_tol")) p.kkt_tol = cfg["kkt_tol"].get<double>();
  if (cfg.contains("max_passes"))
    p.max_passes = cfg["max_passes"].get<std::size_t>();
  if (!(p.c > 0.0)) throw InvalidParams("C must be > 0");
  if (!(p.rbf_gamma > 0.0)) throw InvalidParams("gamma must be > 0");
  if (p.epsilon < 0.0) throw InvalidParams("epsilon must be >= 0");
  return p;
}

nlohmann::json SvrParams::to_json() const {
  return {{"C", c},
          {"gamma", rbf_gamma},
          {"epsilon", epsilon},
          {"kkt_tol", kkt_tol},
          {"max_passes", max_passes}};
}

double rbf_kernel(std::span<const double> a, std::span<const double> b,
                  double gamma) {
  if (a.size() != b.size())
    throw DimensionMismatch("kernel arguments differ in dimension");
  return std::exp(-gamma * linalg::sq_dist(a.data(), b.data(), a.size()));
}

void SvrModel::fit(const Matrix& x, const Matrix& y, std::uint64_t /*seed*/) {
  const std::size_t n = x.rows();
  if (n == 0) throw EmptyData("SVR needs data");
  if (y.cols() != 1)
    throw TargetCountMismatch("SVR is single-target; wrap for multi-output");

  support_x_ = x;
  beta_.assign(n, 0.0);

  // Training Gram matrix K(x_i, x_j) = exp(-gamma * ||x_i - x_j||^2).
  Matrix kernel(n, n);
  if (sq_dist_cache_ && sq_dist_cache_->rows() >= n) {
    const Matrix& dist = *sq_dist_cache_;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        kernel(i, j) = std::exp(-params_.rbf_gamma * dist(i, j));
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      kernel(i, i) = 1.0;
      for (std::size_t j = i + 1; j < n; ++j) {
        const double k = rbf_kernel(x.row(i), x.row(j), params_.rbf_gamma);
        kernel(i, j) = k;
        kernel(j, i) = k;
      }
    }
  }

  // SMO over 2n box variables z = [alpha; alpha*], z in [0, C], with the
  // equality constraint sum_i s_i z_i = 0 where s = +1 on the alpha block
  // and -1 on the alpha* block. Minimized objective:
  //   1/2 sum_ij s_i s_j K_ij z_i z_j + sum_i p_i z_i,
  //   p_i = eps - y_i (alpha block), p_i = eps + y_i (alpha* block).
  // grad_i = s_i (K beta)_i + p_i with beta = alpha - alpha*.
  const double c_box = params_.c;
  const double eps_tube = params_.epsilon;
  std::vector<double> z(2 * n, 0.0);
  std::vector<double> grad(2 * n);
  for (std::size_t i = 0; i < n; ++i) {
    grad[i] = eps_tube - y(i, 0);
    grad[n + i] = eps_tube + y(i, 0);
  }

  auto sign_of = [n](std::size_t idx) { return idx < n ? 1.0 : -1.0; };
  auto data_of = [n](std::size_t idx) { return idx < n ? idx : idx - n; };

  double gap = std::numeric_limits<double>::infinity();
  std::size_t iter = 0;
  for (; iter < params_.max_passes; ++iter) {
    // maximal violating pair
    double m_up = -std::numeric_limits<double>::infinity();
    double m_low = std::numeric_limits<double>::infinity();
    std::size_t i_up = 2 * n, i_low = 2 * n;
    for (std::size_t t = 0; t < 2 * n; ++t) {
      const double s = sign_of(t);
      const double score = -s * grad[t];
      const bool in_up = (s > 0.0) ? z[t] < c_box : z[t] > 0.0;
      const bool in_low = (s > 0.0) ? z[t] > 0.0 : z[t] < c_box;
      if (in_up && score > m_up) {
        m_up = score;
        i_up = t;
      }
      if (in_low && score < m_low) {
        m_low = score;
        i_low = t;
      }
    }
    gap = m_up - m_low;
    if (gap < params_.kkt_tol || i_up >= 2 * n || i_low >= 2 * n) break;

    const std::size_t di = data_of(i_up), dj = data_of(i_low);
    const double si = sign_of(i_up), sj = sign_of(i_low);

    double curvature =
        kernel(di, di) + kernel(dj, dj) - 2.0 * kernel(di, dj);
    if (curvature < 1e-12) curvature = 1e-12;

    // step t >= 0 along dz_iup = s_i t, dz_ilow = -s_j t
    double step = gap / curvature;
    step = std::min(step, si > 0.0 ? c_box - z[i_up] : z[i_up]);
    step = std::min(step, sj > 0.0 ? z[i_low] : c_box - z[i_low]);
    if (step <= 0.0) break;  // numerically stuck at a box corner

    z[i_up] += si * step;
    z[i_low] -= sj * step;
    beta_[di] += step;
    beta_[dj] -= step;

    // grad_k += s_k * step * (K(k, di) - K(k, dj)) on both blocks
    const double* krow_i = &kernel(di, 0);
    const double* krow_j = &kernel(dj, 0);
    for (std::size_t k = 0; k < n; ++k) {
      const double delta = step * (krow_i[k] - krow_j[k]);
      grad[k] += delta;
      grad[n + k] -= delta;
    }
  }

  converged_ = gap < params_.kkt_tol;
  final_kkt_violation_ = std::max(gap, 0.0);

  // bias from free variables: b = -s_i grad_i averaged; fall back to the
  // midpoint of the KKT interval when every variable sits on a bound
  double bias_sum = 0.0;
  std::size_t free_count = 0;
  for (std::size_t t = 0; t < 2 * n; ++t) {
    if (z[t] > 0.0 && z[t] < c_box) {
      bias_sum += -sign_of(t) * grad[t];
      ++free_count;
    }
  }
  if (free_count > 0) {
    bias_ = bias_sum / static_cast<double>(free_count);
  } else {
    double m_up = -std::numeric_limits<double>::infinity();
    double m_low = std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t < 2 * n; ++t) {
      const double s = sign_of(t);
      const double score = -s * grad[t];
      const bool in_up = (s > 0.0) ? z[t] < c_box : z[t] > 0.0;
      const bool in_low = (s > 0.0) ? z[t] > 0.0 : z[t] < c_box;
      if (in_up) m_up = std::max(m_up, score);
      if (in_low) m_low = std::min(m_low, score);
    }
    bias_ = 0.5 * (m_up + m_low);
  }
}

Matrix SvrModel::predict(const Matrix& x) const {
  if (support_x_.rows() == 0) throw InvalidParams("predict before fit");
  if (x.cols() != support_x_.cols())
    throw DimensionMismatch("SVR fitted on " + std::to_string(support_x_.cols()) +
                            " features, got " + std::to_string(x.cols()));
  Matrix out(x.rows(), 1);
  for (std::size_t r = 0; r < x.rows(); ++r) {
    double acc = bias_;
    for (std::size_t i = 0; i < support_x_.rows(); ++i) {
      if (beta_[i] == 0.0) continue;
      acc += beta_[i] * rbf_kernel(support_x_.row(i), x.row(r), params_.rbf_gamma);
    }
    out(r, 0) = acc;
  }
  return out;
}

nlohmann::json SvrModel::to_json() const {
  nlohmann::json support = nlohmann::json::array();
  for (std::size_t r = 0; r < support_x_.rows(); ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (std::size_t c = 0; c < support_x_.cols(); ++c)
      row.push_back(support_x_(r, c));
    support.push_back(std::move(row));
  }
  return {{"model", "svr"},
          {"params", params_.to_json()},
          {"beta", beta_},
          {"bias", bias_},
          {"converged", converged_},
          {"support_x", std::move(support)}};
}

SvrModel SvrModel::from_json(const nlohmann::json& j) {
  SvrModel m(SvrParams::from_config(j.at("params")));
  m.beta_ = j.at("beta").get<std::vector<double>>();
  m.bias_ = j.at("bias").get<double>();
  m.converged_ = j.at("converged").get<bool>();
  const auto& rows = j.at("support_x");
  if (!rows.empty()) {
    m.support_x_ = Matrix(rows.size(), rows[0].size());
    for (std::size_t r = 0; r < rows.size(); ++r)
      for (std::size_t c = 0; c < rows[r].size(); ++c)
        m.support_x_(r, c) = rows[r][c].get<double>();
  }
  return m;
}

}  // namespace wxbench
