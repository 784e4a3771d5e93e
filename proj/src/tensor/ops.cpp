#include <algorithm>
#include <cmath>
#include <sstream>

#include "fnmt/error.hpp"
#include "fnmt/tensor.hpp"
#include "node.hpp"

namespace fnmt {

namespace {

using detail::TensorNode;
using NodePtr = std::shared_ptr<TensorNode>;

const NodePtr& node_of(const Tensor& t) {
  const auto& n = detail::NodeAccess::node(t);
  if (!n) throw ContractError("use of an undefined tensor");
  return n;
}

std::string shape_str(const Shape& s) {
  std::ostringstream out;
  out << '[';
  for (std::size_t i = 0; i < s.size(); ++i) out << (i ? "x" : "") << s[i];
  out << ']';
  return out.str();
}

[[noreturn]] void shape_mismatch(const char* op, const Tensor& a, const Tensor& b) {
  throw DimensionError(std::string(op) + ": incompatible shapes " + shape_str(a.shape()) +
                       " and " + shape_str(b.shape()));
}

bool recording(std::initializer_list<const Tensor*> inputs) {
  if (active_tape() == nullptr) return false;
  return std::any_of(inputs.begin(), inputs.end(),
                     [](const Tensor* t) { return node_of(*t)->requires_grad; });
}

void attach(const Tensor& out, std::function<void()> rule) {
  const auto& n = node_of(out);
  n->requires_grad = true;
  active_tape()->record(n, std::move(rule));
}

// Gradient sink for an input, or nullptr when the input is a constant.
double* sink(const NodePtr& n) { return n->requires_grad ? n->grad_buffer() : nullptr; }

void require_matrix(const char* op, const Tensor& a) {
  if (a.rank() != 2) {
    throw DimensionError(std::string(op) + ": expected a matrix, got " + shape_str(a.shape()));
  }
}

void check_finite(const char* op, std::span<const double> v) {
  for (double x : v) {
    if (!std::isfinite(x)) throw NumericError(std::string(op) + ": non-finite input");
  }
}

enum class Binary { kAdd, kSub, kMul };

Tensor binary(Binary kind, const char* name, const Tensor& a, const Tensor& b) {
  const std::size_t na = a.size();
  const std::size_t nb = b.size();
  const bool same = a.shape() == b.shape();
  if (!same && na != 1 && nb != 1) shape_mismatch(name, a, b);
  const Shape& out_shape = (same || nb == 1) ? a.shape() : b.shape();
  const std::size_t n = std::max(na, nb);
  auto av = a.values();
  auto bv = b.values();
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = av[na == 1 ? 0 : i];
    const double y = bv[nb == 1 ? 0 : i];
    switch (kind) {
      case Binary::kAdd: out[i] = x + y; break;
      case Binary::kSub: out[i] = x - y; break;
      case Binary::kMul: out[i] = x * y; break;
    }
  }
  Tensor result(out_shape, std::move(out));
  if (recording({&a, &b})) {
    NodePtr an = node_of(a), bn = node_of(b);
    TensorNode* on = node_of(result).get();
    attach(result, [kind, an, bn, on, n, na, nb] {
      const double* g = on->grad.data();
      double* ga = sink(an);
      double* gb = sink(bn);
      for (std::size_t i = 0; i < n; ++i) {
        const std::size_t ia = na == 1 ? 0 : i;
        const std::size_t ib = nb == 1 ? 0 : i;
        switch (kind) {
          case Binary::kAdd:
            if (ga) ga[ia] += g[i];
            if (gb) gb[ib] += g[i];
            break;
          case Binary::kSub:
            if (ga) ga[ia] += g[i];
            if (gb) gb[ib] -= g[i];
            break;
          case Binary::kMul:
            if (ga) ga[ia] += g[i] * bn->value[ib];
            if (gb) gb[ib] += g[i] * an->value[ia];
            break;
        }
      }
    });
  }
  return result;
}

void softmax_rows(std::span<const double> in, std::span<double> out, std::size_t rows,
                  std::size_t cols, std::span<const double> mask) {
  for (std::size_t r = 0; r < rows; ++r) {
    const double* x = in.data() + r * cols;
    double* y = out.data() + r * cols;
    const double* m = mask.empty() ? nullptr : mask.data() + r * cols;
    double peak = -INFINITY;
    for (std::size_t c = 0; c < cols; ++c) {
      if (!m || m[c] != 0.0) peak = std::max(peak, x[c]);
    }
    if (peak == -INFINITY) throw ContractError("masked_softmax: row has no unmasked entry");
    double total = 0.0;
    for (std::size_t c = 0; c < cols; ++c) {
      y[c] = (!m || m[c] != 0.0) ? std::exp(x[c] - peak) : 0.0;
      total += y[c];
    }
    for (std::size_t c = 0; c < cols; ++c) y[c] /= total;
  }
}

Tensor softmax_impl(const char* name, const Tensor& logits, std::span<const double> mask) {
  const std::size_t rows = logits.rows();
  const std::size_t cols = logits.cols();
  if (!mask.empty() && mask.size() != logits.size()) {
    throw DimensionError(std::string(name) + ": mask size does not match logits");
  }
  auto x = logits.values();
  for (std::size_t i = 0; i < x.size(); ++i) {
    if ((mask.empty() || mask[i] != 0.0) && !std::isfinite(x[i])) {
      throw NumericError(std::string(name) + ": non-finite input");
    }
  }
  std::vector<double> y(x.size());
  softmax_rows(x, y, rows, cols, mask);
  Tensor result(logits.shape(), std::move(y));
  if (recording({&logits})) {
    NodePtr in = node_of(logits);
    TensorNode* on = node_of(result).get();
    attach(result, [in, on, rows, cols] {
      double* gx = sink(in);
      const double* g = on->grad.data();
      const double* y = on->value.data();
      for (std::size_t r = 0; r < rows; ++r) {
        double dot = 0.0;
        for (std::size_t c = 0; c < cols; ++c) dot += g[r * cols + c] * y[r * cols + c];
        for (std::size_t c = 0; c < cols; ++c) {
          const std::size_t i = r * cols + c;
          gx[i] += y[i] * (g[i] - dot);
        }
      }
    });
  }
  return result;
}

}  // namespace

Tensor matmul(const Tensor& a, const Tensor& b) {
  require_matrix("matmul", a);
  require_matrix("matmul", b);
  const std::size_t m = a.shape()[0], k = a.shape()[1], n = b.shape()[1];
  if (b.shape()[0] != k) shape_mismatch("matmul", a, b);
  auto av = a.values();
  auto bv = b.values();
  std::vector<double> out(m * n, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    double* row = out.data() + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const double x = av[i * k + p];
      if (x == 0.0) continue;
      const double* brow = bv.data() + p * n;
      for (std::size_t j = 0; j < n; ++j) row[j] += x * brow[j];
    }
  }
  Tensor result({m, n}, std::move(out));
  if (recording({&a, &b})) {
    NodePtr an = node_of(a), bn = node_of(b);
    TensorNode* on = node_of(result).get();
    attach(result, [an, bn, on, m, k, n] {
      const double* g = on->grad.data();
      if (double* ga = sink(an)) {
        const double* bd = bn->value.data();
        for (std::size_t i = 0; i < m; ++i) {
          for (std::size_t p = 0; p < k; ++p) {
            double acc = 0.0;
            for (std::size_t j = 0; j < n; ++j) acc += g[i * n + j] * bd[p * n + j];
            ga[i * k + p] += acc;
          }
        }
      }
      if (double* gb = sink(bn)) {
        const double* ad = an->value.data();
        for (std::size_t i = 0; i < m; ++i) {
          for (std::size_t p = 0; p < k; ++p) {
            const double x = ad[i * k + p];
            if (x == 0.0) continue;
            for (std::size_t j = 0; j < n; ++j) gb[p * n + j] += x * g[i * n + j];
          }
        }
      }
    });
  }
  return result;
}

Tensor add(const Tensor& a, const Tensor& b) { return binary(Binary::kAdd, "add", a, b); }
Tensor sub(const Tensor& a, const Tensor& b) { return binary(Binary::kSub, "sub", a, b); }
Tensor mul(const Tensor& a, const Tensor& b) { return binary(Binary::kMul, "mul", a, b); }

Tensor scale(const Tensor& a, double factor) {
  auto av = a.values();
  std::vector<double> out(av.begin(), av.end());
  for (double& x : out) x *= factor;
  Tensor result(a.shape(), std::move(out));
  if (recording({&a})) {
    NodePtr an = node_of(a);
    TensorNode* on = node_of(result).get();
    attach(result, [an, on, factor] {
      double* ga = sink(an);
      for (std::size_t i = 0; i < on->grad.size(); ++i) ga[i] += factor * on->grad[i];
    });
  }
  return result;
}

Tensor tanh(const Tensor& a) {
  auto av = a.values();
  std::vector<double> out(av.size());
  for (std::size_t i = 0; i < av.size(); ++i) out[i] = std::tanh(av[i]);
  Tensor result(a.shape(), std::move(out));
  if (recording({&a})) {
    NodePtr an = node_of(a);
    TensorNode* on = node_of(result).get();
    attach(result, [an, on] {
      double* ga = sink(an);
      for (std::size_t i = 0; i < on->grad.size(); ++i) {
        const double y = on->value[i];
        ga[i] += on->grad[i] * (1.0 - y * y);
      }
    });
  }
  return result;
}

Tensor sigmoid(const Tensor& a) {
  auto av = a.values();
  std::vector<double> out(av.size());
  for (std::size_t i = 0; i < av.size(); ++i) {
    const double x = av[i];
    // Split by sign so exp never overflows.
    out[i] = x >= 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
  }
  Tensor result(a.shape(), std::move(out));
  if (recording({&a})) {
    NodePtr an = node_of(a);
    TensorNode* on = node_of(result).get();
    attach(result, [an, on] {
      double* ga = sink(an);
      for (std::size_t i = 0; i < on->grad.size(); ++i) {
        const double y = on->value[i];
        ga[i] += on->grad[i] * y * (1.0 - y);
      }
    });
  }
  return result;
}

Tensor softmax(const Tensor& logits) { return softmax_impl("softmax", logits, {}); }

Tensor masked_softmax(const Tensor& logits, std::span<const double> mask) {
  if (mask.size() != logits.size()) {
    throw DimensionError("masked_softmax: mask size does not match logits " +
                         shape_str(logits.shape()));
  }
  return softmax_impl("masked_softmax", logits, mask);
}

Tensor log_softmax(const Tensor& logits) {
  const std::size_t rows = logits.rows();
  const std::size_t cols = logits.cols();
  auto x = logits.values();
  check_finite("log_softmax", x);
  std::vector<double> y(x.size());
  for (std::size_t r = 0; r < rows; ++r) {
    const double* xr = x.data() + r * cols;
    const double peak = *std::max_element(xr, xr + cols);
    double total = 0.0;
    for (std::size_t c = 0; c < cols; ++c) total += std::exp(xr[c] - peak);
    const double log_z = peak + std::log(total);
    for (std::size_t c = 0; c < cols; ++c) y[r * cols + c] = xr[c] - log_z;
  }
  Tensor result(logits.shape(), std::move(y));
  if (recording({&logits})) {
    NodePtr in = node_of(logits);
    TensorNode* on = node_of(result).get();
    attach(result, [in, on, rows, cols] {
      double* gx = sink(in);
      const double* g = on->grad.data();
      const double* y = on->value.data();
      for (std::size_t r = 0; r < rows; ++r) {
        double total = 0.0;
        for (std::size_t c = 0; c < cols; ++c) total += g[r * cols + c];
        for (std::size_t c = 0; c < cols; ++c) {
          const std::size_t i = r * cols + c;
          gx[i] += g[i] - std::exp(y[i]) * total;
        }
      }
    });
  }
  return result;
}

Tensor add_bias(const Tensor& a, const Tensor& bias) {
  require_matrix("add_bias", a);
  const std::size_t rows = a.shape()[0], cols = a.shape()[1];
  if (bias.size() != cols) shape_mismatch("add_bias", a, bias);
  auto av = a.values();
  auto bv = bias.values();
  std::vector<double> out(av.begin(), av.end());
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) out[r * cols + c] += bv[c];
  }
  Tensor result(a.shape(), std::move(out));
  if (recording({&a, &bias})) {
    NodePtr an = node_of(a), bn = node_of(bias);
    TensorNode* on = node_of(result).get();
    attach(result, [an, bn, on, rows, cols] {
      const double* g = on->grad.data();
      if (double* ga = sink(an)) {
        for (std::size_t i = 0; i < rows * cols; ++i) ga[i] += g[i];
      }
      if (double* gb = sink(bn)) {
        for (std::size_t r = 0; r < rows; ++r) {
          for (std::size_t c = 0; c < cols; ++c) gb[c] += g[r * cols + c];
        }
      }
    });
  }
  return result;
}

Tensor scale_rows(const Tensor& a, const Tensor& weights) {
  require_matrix("scale_rows", a);
  const std::size_t rows = a.shape()[0], cols = a.shape()[1];
  if (weights.size() != rows) shape_mismatch("scale_rows", a, weights);
  auto av = a.values();
  auto wv = weights.values();
  std::vector<double> out(av.size());
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) out[r * cols + c] = av[r * cols + c] * wv[r];
  }
  Tensor result(a.shape(), std::move(out));
  if (recording({&a, &weights})) {
    NodePtr an = node_of(a), wn = node_of(weights);
    TensorNode* on = node_of(result).get();
    attach(result, [an, wn, on, rows, cols] {
      const double* g = on->grad.data();
      double* ga = sink(an);
      double* gw = sink(wn);
      for (std::size_t r = 0; r < rows; ++r) {
        double acc = 0.0;
        for (std::size_t c = 0; c < cols; ++c) {
          const std::size_t i = r * cols + c;
          if (ga) ga[i] += g[i] * wn->value[r];
          acc += g[i] * an->value[i];
        }
        if (gw) gw[r] += acc;
      }
    });
  }
  return result;
}

Tensor concat_cols(const std::vector<Tensor>& parts) {
  if (parts.empty()) throw ContractError("concat_cols: no operands");
  const std::size_t rows = parts.front().rows();
  std::size_t total = 0;
  for (const auto& p : parts) {
    require_matrix("concat_cols", p);
    if (p.rows() != rows) shape_mismatch("concat_cols", parts.front(), p);
    total += p.cols();
  }
  std::vector<double> out(rows * total);
  std::size_t offset = 0;
  for (const auto& p : parts) {
    const std::size_t pc = p.cols();
    auto pv = p.values();
    for (std::size_t r = 0; r < rows; ++r) {
      std::copy_n(pv.data() + r * pc, pc, out.data() + r * total + offset);
    }
    offset += pc;
  }
  Tensor result({rows, total}, std::move(out));
  bool any = false;
  for (const auto& p : parts) any = any || recording({&p});
  if (any) {
    std::vector<NodePtr> nodes;
    for (const auto& p : parts) nodes.push_back(node_of(p));
    TensorNode* on = node_of(result).get();
    attach(result, [nodes, on, rows, total] {
      std::size_t off = 0;
      for (const auto& n : nodes) {
        const std::size_t pc = n->shape[1];
        if (double* gp = sink(n)) {
          for (std::size_t r = 0; r < rows; ++r) {
            for (std::size_t c = 0; c < pc; ++c) gp[r * pc + c] += on->grad[r * total + off + c];
          }
        }
        off += pc;
      }
    });
  }
  return result;
}

Tensor slice_cols(const Tensor& a, std::size_t begin, std::size_t count) {
  require_matrix("slice_cols", a);
  const std::size_t rows = a.shape()[0], cols = a.shape()[1];
  if (count == 0 || begin + count > cols) {
    throw DimensionError("slice_cols: columns [" + std::to_string(begin) + ", " +
                         std::to_string(begin + count) + ") outside " + shape_str(a.shape()));
  }
  auto av = a.values();
  std::vector<double> out(rows * count);
  for (std::size_t r = 0; r < rows; ++r) {
    std::copy_n(av.data() + r * cols + begin, count, out.data() + r * count);
  }
  Tensor result({rows, count}, std::move(out));
  if (recording({&a})) {
    NodePtr an = node_of(a);
    TensorNode* on = node_of(result).get();
    attach(result, [an, on, rows, cols, begin, count] {
      double* ga = sink(an);
      for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < count; ++c) {
          ga[r * cols + begin + c] += on->grad[r * count + c];
        }
      }
    });
  }
  return result;
}

Tensor gather_rows(const Tensor& table, std::span<const int> ids) {
  require_matrix("gather_rows", table);
  if (ids.empty()) throw ContractError("gather_rows: empty id list");
  const std::size_t vocab = table.shape()[0], dim = table.shape()[1];
  auto tv = table.values();
  std::vector<double> out(ids.size() * dim);
  for (std::size_t r = 0; r < ids.size(); ++r) {
    if (ids[r] < 0 || static_cast<std::size_t>(ids[r]) >= vocab) {
      throw ContractError("gather_rows: index " + std::to_string(ids[r]) +
                          " outside table of " + std::to_string(vocab) + " rows");
    }
    std::copy_n(tv.data() + ids[r] * dim, dim, out.data() + r * dim);
  }
  Tensor result({ids.size(), dim}, std::move(out));
  if (recording({&table})) {
    NodePtr tn = node_of(table);
    TensorNode* on = node_of(result).get();
    std::vector<int> rows(ids.begin(), ids.end());
    attach(result, [tn, on, rows = std::move(rows), dim] {
      double* gt = sink(tn);
      for (std::size_t r = 0; r < rows.size(); ++r) {
        for (std::size_t c = 0; c < dim; ++c) gt[rows[r] * dim + c] += on->grad[r * dim + c];
      }
    });
  }
  return result;
}

Tensor sum(const Tensor& a) {
  double total = 0.0;
  for (double x : a.values()) total += x;
  Tensor result = Tensor::scalar(total);
  if (recording({&a})) {
    NodePtr an = node_of(a);
    TensorNode* on = node_of(result).get();
    attach(result, [an, on] {
      double* ga = sink(an);
      const double g = on->grad[0];
      for (std::size_t i = 0; i < an->value.size(); ++i) ga[i] += g;
    });
  }
  return result;
}

Tensor pick_weighted_sum(const Tensor& a, std::span<const int> ids,
                         std::span<const double> weights) {
  require_matrix("pick_weighted_sum", a);
  const std::size_t rows = a.shape()[0], cols = a.shape()[1];
  if (ids.size() != rows || weights.size() != rows) {
    throw DimensionError("pick_weighted_sum: need one id and weight per row of " +
                         shape_str(a.shape()));
  }
  auto av = a.values();
  double total = 0.0;
  for (std::size_t r = 0; r < rows; ++r) {
    if (ids[r] < 0 || static_cast<std::size_t>(ids[r]) >= cols) {
      throw ContractError("pick_weighted_sum: index " + std::to_string(ids[r]) +
                          " outside " + std::to_string(cols) + " columns");
    }
    if (weights[r] != 0.0) total += weights[r] * av[r * cols + ids[r]];
  }
  Tensor result = Tensor::scalar(total);
  if (recording({&a})) {
    NodePtr an = node_of(a);
    TensorNode* on = node_of(result).get();
    std::vector<int> picks(ids.begin(), ids.end());
    std::vector<double> w(weights.begin(), weights.end());
    attach(result, [an, on, picks = std::move(picks), w = std::move(w), cols] {
      double* ga = sink(an);
      const double g = on->grad[0];
      for (std::size_t r = 0; r < picks.size(); ++r) ga[r * cols + picks[r]] += g * w[r];
    });
  }
  return result;
}

double global_grad_norm(std::span<const Tensor> tensors) {
  double sq = 0.0;
  for (const auto& t : tensors) {
    if (!t.has_grad()) continue;
    for (double g : t.grad()) sq += g * g;
  }
  return std::sqrt(sq);
}

double clip_global_norm(std::span<Tensor> tensors, double max_norm) {
  if (!(max_norm > 0.0)) throw ConfigError("clip_global_norm: max_norm must be positive");
  const double norm = global_grad_norm(tensors);
  if (norm > max_norm) {
    const double factor = max_norm / norm;
    for (auto& t : tensors) {
      if (!t.has_grad()) continue;
      for (double& g : t.mutable_grad()) g *= factor;
    }
  }
  return norm;
}

}  // namespace fnmt
