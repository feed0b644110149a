// Copyright 2026 synmt authors
// Licensed under the Apache License, Version 2.0; see LICENSE for details.

#include "synmt/tensor.hpp"

#include <cmath>
#include <unordered_map>
#include <unordered_set>

namespace synmt {

namespace {

std::shared_ptr<TensorNode> make_node(Matrix value, std::vector<Tensor> parents,
                                      std::function<void(TensorNode&)> back) {
  auto n = std::make_shared<TensorNode>();
  n->value = std::move(value);
  for (const auto& p : parents) {
    if (p.node()->requires_grad) n->requires_grad = true;
  }
  if (n->requires_grad) {
    for (const auto& p : parents) n->parents.push_back(p.node());
    n->backward_fn = std::move(back);
  }
  return n;
}

}  // namespace

GradRecord::GradRecord(const Tensor& seed) : seed_(seed.node()) {
  // Iterative post-order DFS; deep graphs overflow the call stack otherwise.
  std::unordered_set<TensorNode*> visited;
  std::vector<std::pair<TensorNode*, size_t>> stack;
  std::vector<std::shared_ptr<TensorNode>> ptrs;  // keep alive during build
  if (!seed_->requires_grad) return;
  stack.emplace_back(seed_.get(), 0);
  visited.insert(seed_.get());
  std::unordered_map<TensorNode*, std::shared_ptr<TensorNode>> owner;
  owner[seed_.get()] = seed_;
  while (!stack.empty()) {
    auto& [node, child] = stack.back();
    if (child < node->parents.size()) {
      auto next = node->parents[child++];
      if (next->requires_grad && !visited.count(next.get())) {
        visited.insert(next.get());
        owner[next.get()] = next;
        stack.emplace_back(next.get(), 0);
      }
    } else {
      order_.push_back(owner[node]);
      stack.pop_back();
    }
  }
}

void GradRecord::run() {
  if (order_.empty()) return;
  seed_->accumulate(Matrix::Ones(seed_->value.rows(), seed_->value.cols()));
  for (auto it = order_.rbegin(); it != order_.rend(); ++it) {
    auto& n = **it;
    if (n.backward_fn && n.grad.size() != 0) n.backward_fn(n);
  }
}

void backward(const Tensor& loss) {
  if (loss.rows() != 1 || loss.cols() != 1)
    throw DimensionError("backward() requires a 1x1 scalar seed");
  GradRecord rec(loss);
  rec.run();
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.cols() != b.rows())
    throw DimensionError("matmul: inner dimensions " + std::to_string(a.cols()) + " vs " +
                         std::to_string(b.rows()));
  auto an = a.node(), bn = b.node();
  return Tensor(make_node(a.value() * b.value(), {a, b}, [an, bn](TensorNode& n) {
    if (an->requires_grad) an->accumulate(n.grad * bn->value.transpose());
    if (bn->requires_grad) bn->accumulate(an->value.transpose() * n.grad);
  }));
}

Tensor transpose(const Tensor& a) {
  auto an = a.node();
  return Tensor(make_node(a.value().transpose(), {a}, [an](TensorNode& n) {
    an->accumulate(n.grad.transpose());
  }));
}

Tensor add(const Tensor& a, const Tensor& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw DimensionError("add: shape mismatch");
  auto an = a.node(), bn = b.node();
  return Tensor(make_node(a.value() + b.value(), {a, b}, [an, bn](TensorNode& n) {
    if (an->requires_grad) an->accumulate(n.grad);
    if (bn->requires_grad) bn->accumulate(n.grad);
  }));
}

Tensor sub(const Tensor& a, const Tensor& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw DimensionError("sub: shape mismatch");
  auto an = a.node(), bn = b.node();
  return Tensor(make_node(a.value() - b.value(), {a, b}, [an, bn](TensorNode& n) {
    if (an->requires_grad) an->accumulate(n.grad);
    if (bn->requires_grad) bn->accumulate(-n.grad);
  }));
}

Tensor mul(const Tensor& a, const Tensor& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw DimensionError("mul: shape mismatch");
  auto an = a.node(), bn = b.node();
  return Tensor(make_node(a.value().cwiseProduct(b.value()), {a, b}, [an, bn](TensorNode& n) {
    if (an->requires_grad) an->accumulate(n.grad.cwiseProduct(bn->value));
    if (bn->requires_grad) bn->accumulate(n.grad.cwiseProduct(an->value));
  }));
}

Tensor scale(const Tensor& a, double s) {
  auto an = a.node();
  return Tensor(make_node(a.value() * s, {a}, [an, s](TensorNode& n) {
    an->accumulate(n.grad * s);
  }));
}

Tensor add_rowvec(const Tensor& x, const Tensor& row) {
  if (row.rows() != 1 || row.cols() != x.cols())
    throw DimensionError("add_rowvec: row must be 1 x cols(x)");
  auto xn = x.node(), rn = row.node();
  Matrix v = x.value();
  v.rowwise() += row.value().row(0);
  return Tensor(make_node(std::move(v), {x, row}, [xn, rn](TensorNode& n) {
    if (xn->requires_grad) xn->accumulate(n.grad);
    if (rn->requires_grad) rn->accumulate(n.grad.colwise().sum());
  }));
}

Tensor relu(const Tensor& a) {
  auto an = a.node();
  return Tensor(make_node(a.value().cwiseMax(0.0), {a}, [an](TensorNode& n) {
    an->accumulate((an->value.array() > 0.0).cast<double>().matrix().cwiseProduct(n.grad));
  }));
}

Tensor sum(const Tensor& a) {
  auto an = a.node();
  Matrix v(1, 1);
  v(0, 0) = a.value().sum();
  return Tensor(make_node(std::move(v), {a}, [an](TensorNode& n) {
    an->accumulate(Matrix::Constant(an->value.rows(), an->value.cols(), n.grad(0, 0)));
  }));
}

Tensor mul_const(const Tensor& a, const Matrix& c) {
  if (a.rows() != c.rows() || a.cols() != c.cols())
    throw DimensionError("mul_const: shape mismatch");
  auto an = a.node();
  return Tensor(make_node(a.value().cwiseProduct(c), {a}, [an, c](TensorNode& n) {
    an->accumulate(n.grad.cwiseProduct(c));
  }));
}

Tensor add_const(const Tensor& a, const Matrix& c) {
  if (a.rows() != c.rows() || a.cols() != c.cols())
    throw DimensionError("add_const: shape mismatch");
  auto an = a.node();
  return Tensor(make_node(a.value() + c, {a}, [an](TensorNode& n) {
    an->accumulate(n.grad);
  }));
}

Tensor embed_rows(const Tensor& table, const std::vector<int>& ids) {
  for (int id : ids)
    if (id < 0 || id >= table.rows()) throw DimensionError("embed_rows: id out of range");
  Matrix v(static_cast<Eigen::Index>(ids.size()), table.cols());
  for (size_t t = 0; t < ids.size(); ++t) v.row(static_cast<Eigen::Index>(t)) = table.value().row(ids[t]);
  auto tn = table.node();
  return Tensor(make_node(std::move(v), {table}, [tn, ids](TensorNode& n) {
    if (tn->grad.size() == 0) tn->grad = Matrix::Zero(tn->value.rows(), tn->value.cols());
    for (size_t t = 0; t < ids.size(); ++t)
      tn->grad.row(ids[t]) += n.grad.row(static_cast<Eigen::Index>(t));
  }));
}

Tensor concat_cols(const std::vector<Tensor>& parts) {
  if (parts.empty()) throw DimensionError("concat_cols: empty");
  Eigen::Index rows = parts[0].rows(), total = 0;
  for (const auto& p : parts) {
    if (p.rows() != rows) throw DimensionError("concat_cols: row mismatch");
    total += p.cols();
  }
  Matrix v(rows, total);
  Eigen::Index off = 0;
  for (const auto& p : parts) {
    v.middleCols(off, p.cols()) = p.value();
    off += p.cols();
  }
  std::vector<std::shared_ptr<TensorNode>> nodes;
  std::vector<Eigen::Index> widths;
  for (const auto& p : parts) {
    nodes.push_back(p.node());
    widths.push_back(p.cols());
  }
  return Tensor(make_node(std::move(v), parts, [nodes, widths](TensorNode& n) {
    Eigen::Index off = 0;
    for (size_t i = 0; i < nodes.size(); ++i) {
      if (nodes[i]->requires_grad) nodes[i]->accumulate(n.grad.middleCols(off, widths[i]));
      off += widths[i];
    }
  }));
}

Tensor slice_cols(const Tensor& a, Eigen::Index start, Eigen::Index n) {
  if (start < 0 || n < 0 || start + n > a.cols()) throw DimensionError("slice_cols: out of range");
  auto an = a.node();
  return Tensor(make_node(a.value().middleCols(start, n), {a}, [an, start, n](TensorNode& nd) {
    if (an->grad.size() == 0) an->grad = Matrix::Zero(an->value.rows(), an->value.cols());
    an->grad.middleCols(start, n) += nd.grad;
  }));
}

Tensor softmax_rows(const Tensor& s, const BoolMatrix* mask) {
  const Eigen::Index T = s.rows(), C = s.cols();
  if (mask && (mask->rows() != T || mask->cols() != C))
    throw DimensionError("softmax_rows: mask shape mismatch");
  Matrix y(T, C);
  for (Eigen::Index t = 0; t < T; ++t) {
    double mx = -std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < C; ++j)
      if (!mask || (*mask)(t, j)) mx = std::max(mx, s.value()(t, j));
    if (!std::isfinite(mx)) throw std::runtime_error("softmax_rows: fully masked row " + std::to_string(t));
    double z = 0.0;
    for (Eigen::Index j = 0; j < C; ++j) {
      if (!mask || (*mask)(t, j)) {
        y(t, j) = std::exp(s.value()(t, j) - mx);
        z += y(t, j);
      } else {
        y(t, j) = 0.0;
      }
    }
    y.row(t) /= z;
  }
  auto sn = s.node();
  // ds = y .* (g - rowsum(g .* y)); masked entries have y == 0 and get 0 grad.
  return Tensor(make_node(std::move(y), {s}, [sn](TensorNode& n) {
    Matrix gy = n.grad.cwiseProduct(n.value);
    Eigen::VectorXd rowsums = gy.rowwise().sum();
    Matrix ds = n.value.cwiseProduct((n.grad.colwise() - rowsums).eval());
    sn->accumulate(ds);
  }));
}

Tensor layer_norm(const Tensor& x, const Tensor& gain, const Tensor& bias) {
  constexpr double kEps = 1e-6;
  const Eigen::Index T = x.rows(), D = x.cols();
  if (gain.rows() != 1 || gain.cols() != D || bias.rows() != 1 || bias.cols() != D)
    throw DimensionError("layer_norm: gain/bias must be 1 x cols(x)");
  Matrix xhat(T, D);
  Eigen::VectorXd inv_std(T);
  for (Eigen::Index t = 0; t < T; ++t) {
    const double mu = x.value().row(t).mean();
    const double var = (x.value().row(t).array() - mu).square().mean();
    inv_std(t) = 1.0 / std::sqrt(var + kEps);
    xhat.row(t) = (x.value().row(t).array() - mu) * inv_std(t);
  }
  Matrix y = xhat;
  y.array().rowwise() *= gain.value().row(0).array();
  y.rowwise() += bias.value().row(0);
  auto xn = x.node(), gn = gain.node(), bn = bias.node();
  return Tensor(make_node(std::move(y), {x, gain, bias},
                          [xn, gn, bn, xhat, inv_std](TensorNode& n) {
    if (gn->requires_grad) gn->accumulate(n.grad.cwiseProduct(xhat).colwise().sum());
    if (bn->requires_grad) bn->accumulate(n.grad.colwise().sum());
    if (xn->requires_grad) {
      Matrix dxhat = n.grad;
      dxhat.array().rowwise() *= gn->value.row(0).array();
      const Eigen::Index D = xhat.cols();
      Matrix dx(xhat.rows(), D);
      for (Eigen::Index t = 0; t < xhat.rows(); ++t) {
        const double m1 = dxhat.row(t).mean();
        const double m2 = dxhat.row(t).cwiseProduct(xhat.row(t)).mean();
        dx.row(t) = inv_std(t) * (dxhat.row(t).array() - m1 - xhat.row(t).array() * m2);
      }
      xn->accumulate(dx);
    }
  }));
}

Tensor nll_rows(const Tensor& p, const std::vector<int>& idx) {
  const Eigen::Index T = p.rows();
  if (static_cast<Eigen::Index>(idx.size()) != T) throw DimensionError("nll_rows: index count");
  double loss = 0.0;
  for (Eigen::Index t = 0; t < T; ++t) {
    if (idx[t] < 0 || idx[t] >= p.cols()) throw DimensionError("nll_rows: index out of range");
    loss -= std::log(std::max(p.value()(t, idx[t]), 1e-300));
  }
  Matrix v(1, 1);
  v(0, 0) = loss / static_cast<double>(T);
  auto pn = p.node();
  return Tensor(make_node(std::move(v), {p}, [pn, idx, T](TensorNode& n) {
    Matrix g = Matrix::Zero(pn->value.rows(), pn->value.cols());
    for (Eigen::Index t = 0; t < T; ++t)
      g(t, idx[t]) = -n.grad(0, 0) / (static_cast<double>(T) * std::max(pn->value(t, idx[t]), 1e-300));
    pn->accumulate(g);
  }));
}

Tensor cross_entropy_smoothed(const Tensor& logits, const std::vector<int>& targets,
                              double eps, const std::vector<bool>* row_mask) {
  const Eigen::Index T = logits.rows(), V = logits.cols();
  if (static_cast<Eigen::Index>(targets.size()) != T)
    throw DimensionError("cross_entropy_smoothed: target count");
  if (row_mask && static_cast<Eigen::Index>(row_mask->size()) != T)
    throw DimensionError("cross_entropy_smoothed: mask count");
  Matrix probs(T, V);
  double loss = 0.0;
  Eigen::Index n_tokens = 0;
  const double off_mass = (V > 1) ? eps / static_cast<double>(V - 1) : 0.0;
  for (Eigen::Index t = 0; t < T; ++t) {
    const double mx = logits.value().row(t).maxCoeff();
    Eigen::ArrayXd ex = (logits.value().row(t).array() - mx).exp();
    const double z = ex.sum();
    probs.row(t) = (ex / z).matrix();
    if (row_mask && !(*row_mask)[t]) continue;
    ++n_tokens;
    const Eigen::ArrayXd logp = logits.value().row(t).array() - mx - std::log(z);
    loss -= (1.0 - eps) * logp(targets[t]);
    if (eps > 0.0) loss -= off_mass * (logp.sum() - logp(targets[t]));
  }
  if (n_tokens == 0) throw std::runtime_error("cross_entropy_smoothed: no unmasked tokens");
  Matrix v(1, 1);
  v(0, 0) = loss / static_cast<double>(n_tokens);
  auto ln = logits.node();
  std::vector<bool> mask_copy = row_mask ? *row_mask : std::vector<bool>();
  return Tensor(make_node(std::move(v), {logits},
                          [ln, targets, eps, off_mass, probs, n_tokens, mask_copy](TensorNode& n) {
    const Eigen::Index T = probs.rows(), V = probs.cols();
    Matrix g = Matrix::Zero(T, V);
    for (Eigen::Index t = 0; t < T; ++t) {
      if (!mask_copy.empty() && !mask_copy[t]) continue;
      g.row(t) = probs.row(t).array() - off_mass;
      g(t, targets[t]) -= (1.0 - eps) - off_mass;
      g.row(t) *= n.grad(0, 0) / static_cast<double>(n_tokens);
    }
    ln->accumulate(g);
  }));
}

Tensor dropout_mask(const Tensor& x, const Matrix& keep_mask) {
  return mul_const(x, keep_mask);
}

double grad_check(const std::function<Tensor(Tensor&)>& f, Tensor& x, double h) {
  x.zero_grad();
  Tensor loss = f(x);
  if (!std::isfinite(loss.scalar())) throw std::runtime_error("grad_check: non-finite f(x)");
  backward(loss);
  Matrix analytic = x.grad();
  if (analytic.size() == 0) analytic = Matrix::Zero(x.rows(), x.cols());
  double max_rel = 0.0;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
      const double orig = x.value()(i, j);
      x.value()(i, j) = orig + h;
      const double fp = f(x).scalar();
      x.value()(i, j) = orig - h;
      const double fm = f(x).scalar();
      x.value()(i, j) = orig;
      if (!std::isfinite(fp) || !std::isfinite(fm))
        throw std::runtime_error("grad_check: non-finite f at perturbed x");
      const double numeric = (fp - fm) / (2.0 * h);
      const double a = analytic(i, j);
      max_rel = std::max(max_rel, std::abs(a - numeric) / std::max(1.0, std::abs(a)));
    }
  }
  return max_rel;
}

}  // namespace synmt
