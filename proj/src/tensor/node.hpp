#pragma once

#include <memory>
#include <vector>

#include "fnmt/tensor.hpp"

namespace fnmt::detail {

struct TensorNode {
  Shape shape;
  std::vector<double> value;
  std::vector<double> grad;  // empty until populated
  bool requires_grad = false;

  double* grad_buffer() {
    if (grad.empty()) grad.assign(value.size(), 0.0);
    return grad.data();
  }
};

struct NodeAccess {
  static const std::shared_ptr<TensorNode>& node(const Tensor& t) { return t.node_; }
  static Tensor wrap(std::shared_ptr<TensorNode> node) { return Tensor(std::move(node)); }
};

}  // namespace fnmt::detail
