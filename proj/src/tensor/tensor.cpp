#include "fnmt/tensor.hpp"

#include <numeric>
#include <sstream>

#include "fnmt/error.hpp"
#include "node.hpp"

namespace fnmt {

namespace {

thread_local Tape* g_active_tape = nullptr;

std::size_t element_count(const Shape& shape) {
  if (shape.empty()) throw DimensionError("tensor shape must have at least one dimension");
  std::size_t n = 1;
  for (auto d : shape) {
    if (d == 0) throw DimensionError("tensor dimensions must be positive");
    n *= d;
  }
  return n;
}

const detail::TensorNode& checked(const std::shared_ptr<detail::TensorNode>& node) {
  if (!node) throw ContractError("use of an undefined tensor");
  return *node;
}

}  // namespace

Tensor::Tensor(Shape shape) : node_(std::make_shared<detail::TensorNode>()) {
  const std::size_t n = element_count(shape);
  node_->shape = std::move(shape);
  node_->value.assign(n, 0.0);
}

Tensor::Tensor(Shape shape, std::vector<double> values)
    : node_(std::make_shared<detail::TensorNode>()) {
  const std::size_t n = element_count(shape);
  if (values.size() != n) {
    std::ostringstream msg;
    msg << "tensor data holds " << values.size() << " values but shape requires " << n;
    throw DimensionError(msg.str());
  }
  node_->shape = std::move(shape);
  node_->value = std::move(values);
}

Tensor Tensor::filled(Shape shape, double value) {
  Tensor t(std::move(shape));
  std::fill(t.node_->value.begin(), t.node_->value.end(), value);
  return t;
}

Tensor Tensor::scalar(double value) { return Tensor({1}, {value}); }

const Shape& Tensor::shape() const { return checked(node_).shape; }
std::size_t Tensor::size() const { return checked(node_).value.size(); }

std::size_t Tensor::rows() const {
  const auto& s = shape();
  return s.size() == 1 ? 1 : s[0];
}

std::size_t Tensor::cols() const {
  const auto& s = shape();
  return s.size() == 1 ? s[0] : size() / s[0];
}

std::span<const double> Tensor::values() const { return checked(node_).value; }
std::span<double> Tensor::mutable_values() {
  checked(node_);
  return node_->value;
}

double Tensor::item() const {
  if (size() != 1) throw ContractError("item() requires a single-element tensor");
  return node_->value[0];
}

bool Tensor::requires_grad() const { return checked(node_).requires_grad; }
void Tensor::set_requires_grad(bool on) {
  checked(node_);
  node_->requires_grad = on;
}

bool Tensor::has_grad() const { return !checked(node_).grad.empty(); }

std::span<const double> Tensor::grad() const {
  if (!has_grad()) throw ContractError("gradient requested but never populated");
  return node_->grad;
}

std::span<double> Tensor::mutable_grad() {
  checked(node_);
  node_->grad_buffer();
  return node_->grad;
}

void Tensor::zero_grad() {
  checked(node_);
  node_->grad.assign(node_->value.size(), 0.0);
}

void Tensor::clear_grad() {
  checked(node_);
  node_->grad.clear();
}

Tensor Tensor::clone() const {
  Tensor t(shape(), node_->value);
  t.node_->requires_grad = node_->requires_grad;
  return t;
}

Tensor Tensor::detached() const { return Tensor(shape(), node_->value); }

void Tape::record(std::shared_ptr<detail::TensorNode> output, std::function<void()> rule) {
  entries_.push_back(Entry{std::move(output), std::move(rule)});
}

std::size_t Tape::backward(const Tensor& loss) {
  if (!loss.defined() || loss.size() != 1) {
    throw ContractError("backward() requires a scalar loss");
  }
  if (entries_.empty()) throw ContractError("backward() called on an empty tape");
  auto& root = *detail::NodeAccess::node(loss);
  root.grad_buffer()[0] += 1.0;
  std::size_t visited = 0;
  for (auto it = entries_.rbegin(); it != entries_.rend(); ++it) {
    // Entries whose output never received a gradient are not ancestors of
    // the loss.
    if (!it->output->grad.empty()) it->rule();
    ++visited;
  }
  entries_.clear();
  return visited;
}

TapeScope::TapeScope(Tape& tape) : previous_(g_active_tape) { g_active_tape = &tape; }
TapeScope::~TapeScope() { g_active_tape = previous_; }

Tape* active_tape() { return g_active_tape; }

}  // namespace fnmt
