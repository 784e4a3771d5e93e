#pragma once

// Central finite-difference gradient oracle shared by the unit and
// acceptance suites. It only perturbs tensor values and re-evaluates the
// loss with no tape active, so it is independent of the backward rules it
// checks.

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "fnmt/tensor.hpp"

namespace fnmt::testing {

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::string worst;  // "<tensor>[<index>]"
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
  std::size_t checked = 0;
};

inline double relative_error(double analytic, double numeric, double floor) {
  return std::abs(analytic - numeric) /
         std::max({std::abs(analytic), std::abs(numeric), floor});
}

// `loss` must build the scalar loss from the current tensor values.
// Gradients of `inputs` are reset before the analytic pass.
inline GradCheckResult grad_check(const std::function<Tensor()>& loss,
                                  std::vector<std::pair<std::string, Tensor>> inputs,
                                  double h = 1e-5, double floor = 1e-8) {
  for (auto& [name, t] : inputs) t.zero_grad();
  {
    Tape tape;
    TapeScope scope(tape);
    Tensor l = loss();
    tape.backward(l);
  }
  GradCheckResult result;
  for (auto& [name, t] : inputs) {
    auto values = t.mutable_values();
    auto grad = t.grad();
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double saved = values[i];
      values[i] = saved + h;
      const double up = loss().item();
      values[i] = saved - h;
      const double down = loss().item();
      values[i] = saved;
      const double numeric = (up - down) / (2.0 * h);
      const double err = relative_error(grad[i], numeric, floor);
      ++result.checked;
      if (err > result.max_rel_error) {
        result.max_rel_error = err;
        result.worst = name + "[" + std::to_string(i) + "]";
        result.worst_analytic = grad[i];
        result.worst_numeric = numeric;
      }
    }
  }
  return result;
}

}  // namespace fnmt::testing
