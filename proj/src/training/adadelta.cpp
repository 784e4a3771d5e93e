#include <cmath>

#include "fnmt/error.hpp"
#include "fnmt/training.hpp"

namespace fnmt::training {

AdadeltaState AdadeltaState::for_params(std::span<const Tensor> params, double rho,
                                        double epsilon) {
  AdadeltaState s;
  s.rho = rho;
  s.epsilon = epsilon;
  for (const auto& p : params) {
    s.sq_grad.emplace_back(p.size(), 0.0);
    s.sq_update.emplace_back(p.size(), 0.0);
  }
  return s;
}

void adadelta_step(std::span<Tensor> params, AdadeltaState& state) {
  if (params.size() != state.sq_grad.size()) {
    throw ContractError("adadelta_step: state was built for a different parameter list");
  }
  const double rho = state.rho, eps = state.epsilon;
  for (std::size_t k = 0; k < params.size(); ++k) {
    auto& eg = state.sq_grad[k];
    auto& ex = state.sq_update[k];
    auto values = params[k].mutable_values();
    if (eg.size() != values.size()) throw ContractError("adadelta_step: parameter size changed");
    const bool has = params[k].has_grad();
    const auto grad = has ? params[k].grad() : std::span<const double>{};
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double g = has ? grad[i] : 0.0;
      eg[i] = rho * eg[i] + (1.0 - rho) * g * g;
      const double dx = -std::sqrt(ex[i] + eps) / std::sqrt(eg[i] + eps) * g;
      ex[i] = rho * ex[i] + (1.0 - rho) * dx * dx;
      values[i] += dx;
    }
  }
}

}  // namespace fnmt::training
