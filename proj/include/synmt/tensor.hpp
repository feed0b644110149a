// Copyright 2026 synmt authors
// Licensed under the Apache License, Version 2.0; see LICENSE for details.

#ifndef SYNMT_TENSOR_HPP
#define SYNMT_TENSOR_HPP

#include <Eigen/Dense>

#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace synmt {

using Matrix = Eigen::MatrixXd;
using BoolMatrix = Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>;

struct DimensionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Node of the reverse-mode graph. Holds a dense 64-bit value and, after
/// backward(), the accumulated gradient of the seed scalar w.r.t. it.
struct TensorNode {
  Matrix value;
  Matrix grad;  // sized lazily on first accumulation
  bool requires_grad = false;
  std::vector<std::shared_ptr<TensorNode>> parents;
  // Propagates this->grad into parents' grads. Empty for leaves.
  std::function<void(TensorNode&)> backward_fn;

  void accumulate(const Matrix& g) {
    if (grad.size() == 0) grad = Matrix::Zero(value.rows(), value.cols());
    grad += g;
  }
};

/// Value-semantic handle to a graph node. Copies share the node.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::shared_ptr<TensorNode> n) : node_(std::move(n)) {}
  Tensor(Matrix v, bool requires_grad = false) {
    node_ = std::make_shared<TensorNode>();
    node_->value = std::move(v);
    node_->requires_grad = requires_grad;
  }

  bool valid() const { return node_ != nullptr; }
  const Matrix& value() const { return node_->value; }
  Matrix& value() { return node_->value; }
  const Matrix& grad() const { return node_->grad; }
  bool requires_grad() const { return node_->requires_grad; }
  Eigen::Index rows() const { return node_->value.rows(); }
  Eigen::Index cols() const { return node_->value.cols(); }
  double scalar() const {
    if (rows() != 1 || cols() != 1) throw DimensionError("scalar() on non-1x1 tensor");
    return node_->value(0, 0);
  }
  std::shared_ptr<TensorNode> node() const { return node_; }
  void zero_grad() { node_->grad.resize(0, 0); }

 private:
  std::shared_ptr<TensorNode> node_;
};

/// Records the reverse topological order of the graph under a seed node and
/// runs each node's backward rule exactly once, accumulating additively.
class GradRecord {
 public:
  explicit GradRecord(const Tensor& seed);
  void run();  // seeds d(seed)/d(seed) = 1 and propagates

 private:
  std::vector<std::shared_ptr<TensorNode>> order_;  // topological, seed last
  std::shared_ptr<TensorNode> seed_;
};

/// Backpropagates from a 1x1 scalar tensor through the recorded graph.
void backward(const Tensor& loss);

// ---- primitives (all record backward rules when an input requires grad) ----

Tensor matmul(const Tensor& a, const Tensor& b);
Tensor transpose(const Tensor& a);
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);  // elementwise
Tensor scale(const Tensor& a, double s);
// Broadcasts a 1xD row vector across each row of a TxD matrix.
Tensor add_rowvec(const Tensor& x, const Tensor& row);
Tensor relu(const Tensor& a);
Tensor sum(const Tensor& a);  // -> 1x1
Tensor mul_const(const Tensor& a, const Matrix& c);  // grad scales by c
Tensor add_const(const Tensor& a, const Matrix& c);  // grad passes through
// Gathers rows of `table` by index; backward scatter-adds.
Tensor embed_rows(const Tensor& table, const std::vector<int>& ids);
// Stacks blocks left to right; all must share a row count.
Tensor concat_cols(const std::vector<Tensor>& parts);
// Columns [start, start+n) of a.
Tensor slice_cols(const Tensor& a, Eigen::Index start, Eigen::Index n);

/// Row-wise softmax. When `mask` is given, false columns are excluded from
/// normalization and come out exactly 0. A fully masked row is an error.
Tensor softmax_rows(const Tensor& s, const BoolMatrix* mask = nullptr);

/// Per-row standardization (eps=1e-6 inside the variance) followed by
/// elementwise gain and bias, both 1xD.
Tensor layer_norm(const Tensor& x, const Tensor& gain, const Tensor& bias);

/// Mean over rows t of -log(p[t][idx[t]]). `p` must hold row distributions.
Tensor nll_rows(const Tensor& p, const std::vector<int>& idx);

/// Token-mean label-smoothed cross entropy over logits (TxV). Rows where
/// `row_mask` is false (padding) contribute nothing. Smoothing eps spreads
/// over the V-1 non-gold entries.
Tensor cross_entropy_smoothed(const Tensor& logits, const std::vector<int>& targets,
                              double eps, const std::vector<bool>* row_mask = nullptr);

/// Inverted-dropout given a precomputed keep mask (entries 0 or 1/(1-p)).
Tensor dropout_mask(const Tensor& x, const Matrix& keep_mask);

// ---- gradient checking ----

/// Max over coordinates of |analytic - central difference| / max(1, |analytic|).
/// `f` must rebuild its graph from x's current value on every call and return
/// a scalar tensor; analytic gradients are taken from a single backward pass.
double grad_check(const std::function<Tensor(Tensor&)>& f, Tensor& x, double h = 1e-5);

}  // namespace synmt

#endif  // SYNMT_TENSOR_HPP
