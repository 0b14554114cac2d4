#pragma once

// Central finite-difference gradient checking. `loss_fn` must evaluate the
// loss at the current theta without touching the analytic gradient buffer.

#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

namespace wxbench::oracle {

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::size_t worst_index = 0;
  double analytic = 0.0;
  double numeric = 0.0;
};

inline GradCheckResult gradient_check(std::vector<double>& theta,
                                      const std::vector<double>& analytic_grad,
                                      const std::function<double()>& loss_fn,
                                      double step = 1e-5) {
  GradCheckResult res;
  for (std::size_t i = 0; i < theta.size(); ++i) {
    const double saved = theta[i];
    theta[i] = saved + step;
    const double up = loss_fn();
    theta[i] = saved - step;
    const double down = loss_fn();
    theta[i] = saved;
    const double numeric = (up - down) / (2.0 * step);
    const double denom =
        std::max({std::fabs(numeric), std::fabs(analytic_grad[i]), 1e-8});
    const double rel = std::fabs(numeric - analytic_grad[i]) / denom;
    if (rel > res.max_rel_error) {
      res.max_rel_error = rel;
      res.worst_index = i;
      res.analytic = analytic_grad[i];
      res.numeric = numeric;
    }
  }
  return res;
}

}  // namespace wxbench::oracle
