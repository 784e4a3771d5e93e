#pragma once

// Dense row-major float64 arrays with tape-based reverse-mode differentiation.
//
// A Tensor is a shared handle: copies alias the same storage. Operations
// record a backward rule on the thread's active Tape only when a tape is
// active and at least one operand requires a gradient, so inference code
// pays nothing for differentiation.

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <vector>

namespace fnmt {

using Shape = std::vector<std::size_t>;

namespace detail {
struct TensorNode;
struct NodeAccess;
}  // namespace detail

class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape);
  Tensor(Shape shape, std::vector<double> values);

  static Tensor zeros(Shape shape) { return Tensor(std::move(shape)); }
  static Tensor filled(Shape shape, double value);
  static Tensor scalar(double value);

  bool defined() const { return static_cast<bool>(node_); }
  const Shape& shape() const;
  std::size_t rank() const { return shape().size(); }
  std::size_t size() const;
  // Matrix view: a rank-1 tensor is a single row.
  std::size_t rows() const;
  std::size_t cols() const;

  std::span<const double> values() const;
  std::span<double> mutable_values();
  double item() const;
  double at(std::size_t i) const { return values()[i]; }
  double at(std::size_t r, std::size_t c) const { return values()[r * cols() + c]; }

  bool requires_grad() const;
  void set_requires_grad(bool on);

  bool has_grad() const;
  // Throws ContractError when no gradient has been populated.
  std::span<const double> grad() const;
  // Allocates a zero gradient on first use.
  std::span<double> mutable_grad();
  void zero_grad();
  void clear_grad();

  // Deep copy that keeps the requires_grad flag but no gradient.
  Tensor clone() const;
  // Deep copy without gradient participation.
  Tensor detached() const;

  bool same_storage(const Tensor& other) const { return node_ == other.node_; }

 private:
  explicit Tensor(std::shared_ptr<detail::TensorNode> node) : node_(std::move(node)) {}

  std::shared_ptr<detail::TensorNode> node_;

  friend struct detail::NodeAccess;
};

/// Ordered record of primitive operations and their local gradient rules.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }

  // Seeds d(loss)/d(loss) = 1, replays every entry in reverse recording order
  // and clears the tape. Returns the number of entries replayed.
  std::size_t backward(const Tensor& loss);
  void clear() { entries_.clear(); }

  void record(std::shared_ptr<detail::TensorNode> output, std::function<void()> rule);

 private:
  struct Entry {
    std::shared_ptr<detail::TensorNode> output;
    std::function<void()> rule;
  };
  std::vector<Entry> entries_;
};

/// Makes a tape the recording target of the current thread for the scope's
/// lifetime. Scopes nest; the previous tape is restored on exit.
class TapeScope {
 public:
  explicit TapeScope(Tape& tape);
  ~TapeScope();
  TapeScope(const TapeScope&) = delete;
  TapeScope& operator=(const TapeScope&) = delete;

 private:
  Tape* previous_;
};

Tape* active_tape();

// ---------------------------------------------------------------------------
// Operations

Tensor matmul(const Tensor& a, const Tensor& b);

// Elementwise; operands must have equal shapes or one of them must hold a
// single element.
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double factor);
Tensor tanh(const Tensor& a);
Tensor sigmoid(const Tensor& a);

// Rank-1: normalizes the whole vector. Rank-2: normalizes each row.
Tensor softmax(const Tensor& logits);
Tensor log_softmax(const Tensor& logits);
// Row-wise softmax over entries whose mask is nonzero; masked entries are
// exactly zero. `mask` has the logits' element count.
Tensor masked_softmax(const Tensor& logits, std::span<const double> mask);

// a[r×n] + bias[n] added to every row.
Tensor add_bias(const Tensor& a, const Tensor& bias);
// a[r×n] with row i multiplied by weights[i] (weights has r elements).
Tensor scale_rows(const Tensor& a, const Tensor& weights);
Tensor concat_cols(const std::vector<Tensor>& parts);
Tensor slice_cols(const Tensor& a, std::size_t begin, std::size_t count);
// Rows of table[V×d] selected by ids, giving [ids.size()×d].
Tensor gather_rows(const Tensor& table, std::span<const int> ids);

Tensor sum(const Tensor& a);
// Σ_r weights[r] · a[r, ids[r]]; a scalar.
Tensor pick_weighted_sum(const Tensor& a, std::span<const int> ids,
                         std::span<const double> weights);

// Global L2 norm over all populated gradients.
double global_grad_norm(std::span<const Tensor> tensors);
// Scales every gradient by max_norm/g when the global norm g exceeds
// max_norm. Returns g (pre-clip).
double clip_global_norm(std::span<Tensor> tensors, double max_norm);

}  // namespace fnmt
