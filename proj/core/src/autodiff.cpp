#include "ndpp/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>
#include <utility>

namespace ndpp {

namespace {

// Sums a gradient down to `target` when the forward op broadcast a single
// element against a larger operand.
Tensor unbroadcast(const Tensor& grad, const Shape& target) {
  if (grad.shape() == target) return grad;
  if (shape_size(target) == 1) return Tensor(target, sum(grad), grad.dtype());
  throw DimensionError("unbroadcast: cannot reduce " + to_string(grad.shape()) + " to " + to_string(target));
}

void accumulate(Tensor& into, const Tensor& g) {
  if (into.empty()) {
    into = g;
    return;
  }
  if (!same_shape(into, g)) {
    throw DimensionError("gradient shape mismatch " + to_string(into.shape()) + " vs " + to_string(g.shape()));
  }
  for (std::size_t i = 0; i < g.size(); ++i) into[i] += g[i];
}

void require_rank2(const Var& a, const char* op) {
  if (a.value().rank() != 2) {
    throw DimensionError(std::string(op) + ": expected rank-2 input, got " + to_string(a.shape()));
  }
}

template <typename Fn>
Tensor map_values(const Tensor& a, Fn fn) {
  Tensor out = a;
  for (double& v : out.data()) v = fn(v);
  out.apply_precision();
  return out;
}

}  // namespace

Var Var::leaf(Tensor value, bool requires_grad) {
  auto node = std::make_shared<Node>();
  node->value = std::move(value);
  node->requires_grad = requires_grad;
  return Var(std::move(node));
}

const Tensor& Var::value() const {
  if (!node_) throw ContractError("access to an undefined Var");
  return node_->value;
}

Var make_op(Tensor value, std::vector<Var> parents, BackwardFn backward) {
  auto node = std::make_shared<Node>();
  node->value = std::move(value);
  const bool needs = std::any_of(parents.begin(), parents.end(), [](const Var& p) { return p.requires_grad(); });
  if (needs) {
    node->requires_grad = true;
    node->parents.reserve(parents.size());
    for (Var& p : parents) node->parents.push_back(std::move(p.node_));
    node->backward = std::move(backward);
  }
  return Var(std::move(node));
}

Tensor Gradients::of(const Var& leaf) const {
  auto it = grads_.find(leaf.node());
  if (it == grads_.end()) return Tensor(leaf.shape(), 0.0, leaf.value().dtype());
  return it->second;
}

bool Gradients::contains(const Var& leaf) const { return grads_.count(leaf.node()) != 0; }

Gradients backprop(const Var& root) {
  if (!root.defined()) throw ContractError("backprop on an undefined root");
  if (root.value().size() != 1) {
    throw ContractError("backprop requires a single-element root, got " + to_string(root.shape()));
  }
  Gradients result;
  if (!root.requires_grad()) return result;

  // Iterative post-order DFS gives a topological order (parents first).
  std::vector<Node*> order;
  std::unordered_set<const Node*> visited;
  std::vector<std::pair<Node*, std::size_t>> stack;
  stack.emplace_back(root.node_.get(), 0);
  visited.insert(root.node_.get());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->parents.size()) {
      Node* parent = node->parents[next++].get();
      if (parent->requires_grad && visited.insert(parent).second) stack.emplace_back(parent, 0);
      continue;
    }
    order.push_back(node);
    stack.pop_back();
  }

  std::unordered_map<const Node*, Tensor> grads;
  grads[root.node_.get()] = Tensor(root.shape(), 1.0, root.value().dtype());
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node* node = *it;
    auto g = grads.find(node);
    if (g == grads.end()) continue;
    if (node->parents.empty()) {
      result.grads_[node] = std::move(g->second);
      grads.erase(g);
      continue;
    }
    std::vector<Tensor> parent_grads = node->backward(g->second);
    grads.erase(g);
    for (std::size_t i = 0; i < node->parents.size(); ++i) {
      Node* parent = node->parents[i].get();
      if (!parent->requires_grad || i >= parent_grads.size() || parent_grads[i].empty()) continue;
      accumulate(grads[parent], parent_grads[i]);
    }
  }
  return result;
}

// ---- linear algebra -------------------------------------------------------

Var matmul(const Var& a, const Var& b) {
  Tensor out = matmul(a.value(), b.value());
  return make_op(std::move(out), {a, b}, [a, b](const Tensor& g) {
    return std::vector<Tensor>{
        a.requires_grad() ? matmul_nt(g, b.value()) : Tensor{},
        b.requires_grad() ? matmul_tn(a.value(), g) : Tensor{},
    };
  });
}

Var matmul_tn(const Var& a, const Var& b) {
  Tensor out = matmul_tn(a.value(), b.value());
  return make_op(std::move(out), {a, b}, [a, b](const Tensor& g) {
    // out = a^T b  =>  da = b g^T, db = a g
    return std::vector<Tensor>{
        a.requires_grad() ? matmul_nt(b.value(), g) : Tensor{},
        b.requires_grad() ? matmul(a.value(), g) : Tensor{},
    };
  });
}

Var transpose(const Var& a) {
  return make_op(transpose(a.value()), {a}, [](const Tensor& g) { return std::vector<Tensor>{transpose(g)}; });
}

// ---- element-wise ---------------------------------------------------------

Var add(const Var& a, const Var& b) {
  Shape sa = a.shape(), sb = b.shape();
  return make_op(add(a.value(), b.value()), {a, b}, [sa, sb](const Tensor& g) {
    return std::vector<Tensor>{unbroadcast(g, sa), unbroadcast(g, sb)};
  });
}

Var sub(const Var& a, const Var& b) {
  Shape sa = a.shape(), sb = b.shape();
  return make_op(sub(a.value(), b.value()), {a, b}, [sa, sb](const Tensor& g) {
    return std::vector<Tensor>{unbroadcast(g, sa), unbroadcast(scale(g, -1.0), sb)};
  });
}

Var mul(const Var& a, const Var& b) {
  return make_op(mul(a.value(), b.value()), {a, b}, [a, b](const Tensor& g) {
    return std::vector<Tensor>{
        a.requires_grad() ? unbroadcast(mul(g, b.value()), a.shape()) : Tensor{},
        b.requires_grad() ? unbroadcast(mul(g, a.value()), b.shape()) : Tensor{},
    };
  });
}

Var div(const Var& a, const Var& b) {
  Tensor out = div(a.value(), b.value());
  return make_op(std::move(out), {a, b}, [a, b](const Tensor& g) {
    Tensor ga, gb;
    if (a.requires_grad()) ga = unbroadcast(div(g, b.value()), a.shape());
    if (b.requires_grad()) {
      // d(a/b)/db = -a / b^2
      Tensor t = div(mul(g, a.value()), mul(b.value(), b.value()));
      gb = unbroadcast(scale(t, -1.0), b.shape());
    }
    return std::vector<Tensor>{std::move(ga), std::move(gb)};
  });
}

Var scale(const Var& a, double factor) {
  return make_op(scale(a.value(), factor), {a},
                 [factor](const Tensor& g) { return std::vector<Tensor>{scale(g, factor)}; });
}

Var add_scalar(const Var& a, double value) {
  return make_op(add_scalar(a.value(), value), {a}, [](const Tensor& g) { return std::vector<Tensor>{g}; });
}

Var relu(const Var& a) {
  return make_op(relu(a.value()), {a}, [a](const Tensor& g) {
    Tensor out = g;
    const Tensor& x = a.value();
    for (std::size_t i = 0; i < out.size(); ++i)
      if (!(x[i] > 0.0)) out[i] = 0.0;
    return std::vector<Tensor>{std::move(out)};
  });
}

Var sqrt(const Var& a) {
  Tensor out = map_values(a.value(), [](double v) { return std::sqrt(v); });
  Tensor root = out;
  return make_op(std::move(out), {a}, [root](const Tensor& g) {
    Tensor d = g;
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = root[i] > 0.0 ? g[i] / (2.0 * root[i]) : 0.0;
    return std::vector<Tensor>{std::move(d)};
  });
}

Var clamp_min(const Var& a, double floor) {
  Tensor out = map_values(a.value(), [floor](double v) { return v > floor ? v : floor; });
  return make_op(std::move(out), {a}, [a, floor](const Tensor& g) {
    Tensor d = g;
    const Tensor& x = a.value();
    for (std::size_t i = 0; i < d.size(); ++i)
      if (!(x[i] > floor)) d[i] = 0.0;
    return std::vector<Tensor>{std::move(d)};
  });
}

Var square(const Var& a) {
  return make_op(mul(a.value(), a.value()), {a}, [a](const Tensor& g) {
    return std::vector<Tensor>{scale(mul(g, a.value()), 2.0)};
  });
}

// ---- reductions -----------------------------------------------------------

Var sum(const Var& a) {
  Shape s = a.shape();
  return make_op(Tensor::scalar(sum(a.value())), {a},
                 [s](const Tensor& g) { return std::vector<Tensor>{Tensor(s, g[0])}; });
}

Var mean(const Var& a) {
  Shape s = a.shape();
  const double n = static_cast<double>(a.value().size());
  return make_op(Tensor::scalar(mean(a.value())), {a},
                 [s, n](const Tensor& g) { return std::vector<Tensor>{Tensor(s, g[0] / n)}; });
}

Var variance(const Var& a) {
  const double mu = mean(a.value());
  return make_op(Tensor::scalar(variance(a.value())), {a}, [a, mu](const Tensor& g) {
    const Tensor& x = a.value();
    const double n = static_cast<double>(x.size());
    Tensor d(x.shape());
    for (std::size_t i = 0; i < x.size(); ++i) d[i] = g[0] * 2.0 * (x[i] - mu) / n;
    return std::vector<Tensor>{std::move(d)};
  });
}

Var l1mean(const Var& a) {
  return make_op(Tensor::scalar(l1mean(a.value())), {a}, [a](const Tensor& g) {
    const Tensor& x = a.value();
    const double n = static_cast<double>(x.size());
    Tensor d(x.shape());
    for (std::size_t i = 0; i < x.size(); ++i) d[i] = g[0] * (x[i] > 0.0 ? 1.0 : (x[i] < 0.0 ? -1.0 : 0.0)) / n;
    return std::vector<Tensor>{std::move(d)};
  });
}

Var row_mean(const Var& a) {
  require_rank2(a, "row_mean");
  const Tensor& x = a.value();
  const std::size_t n = x.dim(0), d = x.dim(1);
  Tensor out({n, 1}, 0.0, x.dtype());
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < d; ++j) s += x(i, j);
    out[i] = s / static_cast<double>(d);
  }
  out.apply_precision();
  return make_op(std::move(out), {a}, [n, d](const Tensor& g) {
    Tensor grad({n, d});
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < d; ++j) grad(i, j) = g[i] / static_cast<double>(d);
    return std::vector<Tensor>{std::move(grad)};
  });
}

Var row_l1mean(const Var& a) {
  require_rank2(a, "row_l1mean");
  const Tensor& x = a.value();
  const std::size_t n = x.dim(0), d = x.dim(1);
  Tensor out({n, 1}, 0.0, x.dtype());
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < d; ++j) s += std::abs(x(i, j));
    out[i] = s / static_cast<double>(d);
  }
  out.apply_precision();
  return make_op(std::move(out), {a}, [a, n, d](const Tensor& g) {
    const Tensor& xv = a.value();
    Tensor grad({n, d});
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < d; ++j) {
        const double v = xv(i, j);
        const double sign = v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0);
        grad(i, j) = g[i] * sign / static_cast<double>(d);
      }
    return std::vector<Tensor>{std::move(grad)};
  });
}

Var col_mean(const Var& a) {
  require_rank2(a, "col_mean");
  const Tensor& x = a.value();
  const std::size_t n = x.dim(0), d = x.dim(1);
  Tensor out({1, d}, 0.0, x.dtype());
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j) out[j] += x(i, j);
  for (std::size_t j = 0; j < d; ++j) out[j] /= static_cast<double>(n);
  out.apply_precision();
  return make_op(std::move(out), {a}, [n, d](const Tensor& g) {
    Tensor grad({n, d});
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < d; ++j) grad(i, j) = g[j] / static_cast<double>(n);
    return std::vector<Tensor>{std::move(grad)};
  });
}

Var broadcast(const Var& a, const Var& v, BroadcastOp op) {
  require_rank2(a, "broadcast");
  require_rank2(v, "broadcast");
  const Tensor& x = a.value();
  const Tensor& b = v.value();
  const std::size_t n = x.dim(0), d = x.dim(1);
  bool per_row;
  if (b.dim(0) == n && b.dim(1) == 1) {
    per_row = true;
  } else if (b.dim(0) == 1 && b.dim(1) == d) {
    per_row = false;
  } else {
    throw DimensionError("broadcast: vector " + to_string(b.shape()) + " does not fit " + to_string(x.shape()));
  }
  auto vec = [per_row, &b](std::size_t i, std::size_t j) { return per_row ? b[i] : b[j]; };
  Tensor out({n, d}, 0.0, promote(x.dtype(), b.dtype()));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j) {
      const double xv = x(i, j), bv = vec(i, j);
      switch (op) {
        case BroadcastOp::add: out(i, j) = xv + bv; break;
        case BroadcastOp::sub: out(i, j) = xv - bv; break;
        case BroadcastOp::mul: out(i, j) = xv * bv; break;
        case BroadcastOp::div: out(i, j) = xv / bv; break;
      }
    }
  out.apply_precision();
  return make_op(std::move(out), {a, v}, [a, v, op, per_row, n, d](const Tensor& g) {
    const Tensor& xv = a.value();
    const Tensor& bv = v.value();
    Tensor ga, gv;
    const bool need_a = a.requires_grad(), need_v = v.requires_grad();
    if (need_a) ga = Tensor({n, d});
    if (need_v) gv = Tensor(bv.shape());
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < d; ++j) {
        const std::size_t k = per_row ? i : j;
        const double gij = g(i, j), b = bv[k], x = xv(i, j);
        double da = 0.0, db = 0.0;
        switch (op) {
          case BroadcastOp::add: da = gij; db = gij; break;
          case BroadcastOp::sub: da = gij; db = -gij; break;
          case BroadcastOp::mul: da = gij * b; db = gij * x; break;
          case BroadcastOp::div: da = gij / b; db = -gij * x / (b * b); break;
        }
        if (need_a) ga(i, j) = da;
        if (need_v) gv[k] += db;
      }
    return std::vector<Tensor>{std::move(ga), std::move(gv)};
  });
}

// ---- structural -----------------------------------------------------------

Var reshape(const Var& a, Shape shape) {
  Shape original = a.shape();
  return make_op(a.value().reshaped(std::move(shape)), {a},
                 [original](const Tensor& g) { return std::vector<Tensor>{g.reshaped(original)}; });
}

Var slice_cols(const Var& a, std::size_t begin, std::size_t end) {
  Shape original = a.shape();
  return make_op(slice_cols(a.value(), begin, end), {a}, [original, begin](const Tensor& g) {
    Tensor grad(original);
    const std::size_t w = g.dim(1);
    for (std::size_t i = 0; i < original[0]; ++i)
      for (std::size_t j = 0; j < w; ++j) grad(i, begin + j) = g(i, j);
    return std::vector<Tensor>{std::move(grad)};
  });
}

Var slice_rows(const Var& a, std::size_t begin, std::size_t end) {
  Shape original = a.shape();
  return make_op(slice_rows(a.value(), begin, end), {a}, [original, begin](const Tensor& g) {
    Tensor grad(original);
    std::copy(g.data().begin(), g.data().end(), grad.data().begin() + static_cast<std::ptrdiff_t>(begin * original[1]));
    return std::vector<Tensor>{std::move(grad)};
  });
}

Var hstack(std::span<const Var> parts) {
  std::vector<Tensor> values;
  std::vector<std::size_t> widths;
  values.reserve(parts.size());
  for (const Var& p : parts) {
    values.push_back(p.value());
    widths.push_back(p.value().cols());
  }
  Tensor out = hstack(values);
  return make_op(std::move(out), std::vector<Var>(parts.begin(), parts.end()), [widths](const Tensor& g) {
    std::vector<Tensor> grads;
    std::size_t col = 0;
    for (std::size_t w : widths) {
      grads.push_back(slice_cols(g, col, col + w));
      col += w;
    }
    return grads;
  });
}

Var vstack(std::span<const Var> parts) {
  std::vector<Tensor> values;
  std::vector<std::size_t> heights;
  for (const Var& p : parts) {
    values.push_back(p.value());
    heights.push_back(p.value().rows());
  }
  Tensor out = vstack(values);
  return make_op(std::move(out), std::vector<Var>(parts.begin(), parts.end()), [heights](const Tensor& g) {
    std::vector<Tensor> grads;
    std::size_t row = 0;
    for (std::size_t h : heights) {
      grads.push_back(slice_rows(g, row, row + h));
      row += h;
    }
    return grads;
  });
}

Var gather(const Var& a, Shape out_shape, std::shared_ptr<const std::vector<std::ptrdiff_t>> index) {
  if (shape_size(out_shape) != index->size()) {
    throw DimensionError("gather: index length does not match output shape " + to_string(out_shape));
  }
  const Tensor& x = a.value();
  Tensor out(out_shape, 0.0, x.dtype());
  const auto& idx = *index;
  for (std::size_t i = 0; i < idx.size(); ++i) {
    if (idx[i] >= 0) out[i] = x[static_cast<std::size_t>(idx[i])];
  }
  Shape in_shape = x.shape();
  return make_op(std::move(out), {a}, [in_shape, index](const Tensor& g) {
    Tensor grad(in_shape);
    const auto& ix = *index;
    for (std::size_t i = 0; i < ix.size(); ++i) {
      if (ix[i] >= 0) grad[static_cast<std::size_t>(ix[i])] += g[i];
    }
    return std::vector<Tensor>{std::move(grad)};
  });
}

// ---- matrix helpers -------------------------------------------------------

Var trace(const Var& a) {
  const std::size_t n = a.value().rows();
  return make_op(Tensor::scalar(trace(a.value())), {a}, [n](const Tensor& g) {
    Tensor grad({n, n});
    for (std::size_t i = 0; i < n; ++i) grad(i, i) = g[0];
    return std::vector<Tensor>{std::move(grad)};
  });
}

Var symmetrize(const Var& a) {
  return make_op(symmetrize(a.value()), {a}, [](const Tensor& g) { return std::vector<Tensor>{symmetrize(g)}; });
}

Var add_scaled_identity(const Var& a, const Var& coefficient) {
  const Tensor& m = a.value();
  if (m.rank() != 2 || m.dim(0) != m.dim(1)) {
    throw DimensionError("add_scaled_identity: square matrix required, got " + to_string(m.shape()));
  }
  if (coefficient.value().size() != 1) throw DimensionError("add_scaled_identity: coefficient must be a scalar");
  const double c = coefficient.value()[0];
  Tensor out = m;
  for (std::size_t i = 0; i < m.dim(0); ++i) out(i, i) += c;
  out.apply_precision();
  Shape cs = coefficient.shape();
  return make_op(std::move(out), {a, coefficient}, [cs](const Tensor& g) {
    return std::vector<Tensor>{g, Tensor(cs, trace(g))};
  });
}

// ---- losses ---------------------------------------------------------------

Var softmax_cross_entropy(const Var& logits, std::span<const int> labels) {
  require_rank2(logits, "softmax_cross_entropy");
  const Tensor& z = logits.value();
  const std::size_t n = z.dim(0), c = z.dim(1);
  if (labels.size() != n) throw DimensionError("softmax_cross_entropy: label count differs from batch size");
  Tensor probs({n, c});
  double loss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const int label = labels[i];
    if (label < 0 || static_cast<std::size_t>(label) >= c) throw ContractError("label out of range");
    double zmax = z(i, 0);
    for (std::size_t j = 1; j < c; ++j) zmax = std::max(zmax, z(i, j));
    double denom = 0.0;
    for (std::size_t j = 0; j < c; ++j) {
      probs(i, j) = std::exp(z(i, j) - zmax);
      denom += probs(i, j);
    }
    for (std::size_t j = 0; j < c; ++j) probs(i, j) /= denom;
    loss -= (z(i, static_cast<std::size_t>(label)) - zmax) - std::log(denom);
  }
  loss /= static_cast<double>(n);
  std::vector<int> y(labels.begin(), labels.end());
  return make_op(Tensor::scalar(loss), {logits}, [probs, y, n](const Tensor& g) {
    Tensor grad = probs;
    for (std::size_t i = 0; i < n; ++i) grad(i, static_cast<std::size_t>(y[i])) -= 1.0;
    return std::vector<Tensor>{scale(grad, g[0] / static_cast<double>(n))};
  });
}

Var half_mse(const Var& prediction, const Tensor& target) {
  if (!same_shape(prediction.value(), target)) {
    throw DimensionError("half_mse: prediction " + to_string(prediction.shape()) + " vs target " +
                         to_string(target.shape()));
  }
  const double n = static_cast<double>(target.dim(0));
  Tensor residual = sub(prediction.value(), target);
  double s = 0.0;
  for (double r : residual.data()) s += r * r;
  return make_op(Tensor::scalar(0.5 * s / n), {prediction}, [residual, n](const Tensor& g) {
    return std::vector<Tensor>{scale(residual, g[0] / n)};
  });
}

}  // namespace ndpp
