#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "gmvq/array.hpp"

namespace gmvq {

// Reverse-mode automatic differentiation over dense row-major matrices.
//
// Graphs are throwaway: built during one forward pass, swept once by
// backward(), then dropped. Leaves are the only nodes whose adjoints the
// caller reads afterwards (Var::grad()). Adjoints accumulate additively
// across fan-out within a single sweep; backward() re-zeroes every adjoint
// it can reach before seeding the root, so sweeps do not accumulate into
// each other.
//
// Every op validates that its output is finite; NaN/Inf anywhere is an
// error state and throws std::domain_error.

template <typename Scalar>
class VarT;

template <typename Scalar>
void check_finite(const char* op, const MatT<Scalar>& m) {
  if (!m.allFinite())
    throw std::domain_error(std::string("gmvq: non-finite values in output of '") + op + "'");
}

namespace detail {

template <typename Scalar>
struct NodeT {
  MatT<Scalar> value;
  MatT<Scalar> adjoint;  // same shape as value; zero until backward() reaches it
  bool requires_grad = false;
  const char* op = "leaf";
  std::vector<VarT<Scalar>> parents;
  std::function<void(const MatT<Scalar>&)> pullback;  // routes adjoint to parents
};

inline void require(bool ok, const std::string& msg) {
  if (!ok) throw std::invalid_argument("gmvq: " + msg);
}

}  // namespace detail

/// Handle to a node of the differentiation graph. Copies share the node.
template <typename Scalar>
class VarT {
 public:
  using Node = detail::NodeT<Scalar>;
  using MatType = MatT<Scalar>;

  VarT() = default;

  /// Trainable input: participates in backward(), grad() readable after.
  static VarT leaf(MatType v) { return VarT(std::move(v), true, "leaf"); }

  /// Non-trainable input: backward() never descends below it.
  static VarT constant(MatType v) { return VarT(std::move(v), false, "const"); }

  /// Op-author entry point. Fused ops elsewhere in the library (distance
  /// kernels, straight-through estimators) are built through this. The
  /// pullback receives the node's adjoint and must accumulate() into the
  /// captured parents. Parents and pullback are dropped when no parent
  /// requires gradients, so constant subgraphs are freed eagerly.
  static VarT make(const char* op, MatType value, std::vector<VarT> parents,
                   std::function<void(const MatT<Scalar>&)> pullback) {
    bool rq = false;
    for (const auto& p : parents) rq = rq || p.requires_grad();
    VarT v(std::move(value), rq, op);
    if (rq) {
      v.n_->parents = std::move(parents);
      v.n_->pullback = std::move(pullback);
    }
    return v;
  }

  bool valid() const { return static_cast<bool>(n_); }
  const MatType& value() const { return node().value; }
  const MatType& grad() const { return node().adjoint; }
  bool requires_grad() const { return node().requires_grad; }
  Index rows() const { return node().value.rows(); }
  Index cols() const { return node().value.cols(); }
  Index size() const { return node().value.size(); }
  const char* op_name() const { return node().op; }

  /// Adds g to this node's adjoint. No-op for nodes outside the gradient
  /// closure. Shape must match exactly; broadcast reduction happens in the
  /// calling op.
  void accumulate(const MatType& g) const {
    Node& n = node();
    if (!n.requires_grad) return;
    if (g.rows() != n.value.rows() || g.cols() != n.value.cols())
      throw std::logic_error("gmvq: adjoint shape " + shape_str(g) + " does not match value shape " +
                             shape_str(n.value) + " at '" + n.op + "'");
    if (!g.allFinite())
      throw std::domain_error(std::string("gmvq: non-finite adjoint flowing into '") + n.op + "'");
    n.adjoint += g;
  }

  Node* raw() const { return n_.get(); }

 private:
  VarT(MatType v, bool rq, const char* op) : n_(std::make_shared<Node>()) {
    check_finite(op, v);
    n_->value = std::move(v);
    n_->adjoint = MatType::Zero(n_->value.rows(), n_->value.cols());
    n_->requires_grad = rq;
    n_->op = op;
  }
  Node& node() const {
    if (!n_) throw std::logic_error("gmvq: use of empty Var");
    return *n_;
  }
  std::shared_ptr<Node> n_;
};

using Var = VarT<double>;

/// Reverse sweep from a scalar root. After the call, every leaf reachable
/// through gradient-requiring paths holds d(root)/d(leaf) in grad();
/// unreachable nodes keep zero adjoints.
template <typename Scalar>
void backward(const VarT<Scalar>& root) {
  using Node = detail::NodeT<Scalar>;
  detail::require(root.rows() == 1 && root.cols() == 1,
                  "backward() root must be a 1x1 scalar, got " + shape_str(root.value()));

  // Iterative postorder DFS over the gradient closure.
  std::vector<Node*> order;
  std::unordered_set<Node*> seen;
  struct Frame {
    Node* n;
    size_t next;
  };
  std::vector<Frame> stack;
  stack.push_back({root.raw(), 0});
  seen.insert(root.raw());
  while (!stack.empty()) {
    Frame& f = stack.back();
    if (f.next < f.n->parents.size()) {
      Node* p = f.n->parents[f.next++].raw();
      if (p->requires_grad && !seen.count(p)) {
        seen.insert(p);
        stack.push_back({p, 0});
      }
    } else {
      order.push_back(f.n);
      stack.pop_back();
    }
  }

  for (Node* n : order) n->adjoint.setZero();
  root.raw()->adjoint(0, 0) = Scalar(1);
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node* n = *it;
    if (n->pullback) n->pullback(n->adjoint);
  }
}

// ---------------------------------------------------------------------------
// Broadcasting: binary elementwise ops accept equal shapes, a 1xN row against
// RxN, an Rx1 column against RxC, or a 1x1 scalar against anything. Backward
// sums the upstream gradient over the replicated dimensions.

namespace detail {

template <typename Scalar>
std::pair<Index, Index> broadcast_shape(const VarT<Scalar>& a, const VarT<Scalar>& b, const char* op) {
  const Index r = std::max(a.rows(), b.rows());
  const Index c = std::max(a.cols(), b.cols());
  require((a.rows() == r || a.rows() == 1) && (a.cols() == c || a.cols() == 1) &&
              (b.rows() == r || b.rows() == 1) && (b.cols() == c || b.cols() == 1),
          std::string(op) + ": shapes " + shape_str(a.value()) + " and " + shape_str(b.value()) +
              " do not broadcast");
  return {r, c};
}

template <typename Scalar>
MatT<Scalar> broadcast_to(const MatT<Scalar>& m, Index r, Index c) {
  if (m.rows() == r && m.cols() == c) return m;
  return m.replicate(r / m.rows(), c / m.cols());
}

/// Sums g down to shape (r, c); adjoint counterpart of broadcast_to.
template <typename Scalar>
MatT<Scalar> reduce_to(const MatT<Scalar>& g, Index r, Index c) {
  MatT<Scalar> t = g;
  if (r == 1 && t.rows() != 1) {
    MatT<Scalar> s = t.colwise().sum();
    t.swap(s);
  }
  if (c == 1 && t.cols() != 1) {
    MatT<Scalar> s = t.rowwise().sum();
    t.swap(s);
  }
  return t;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Forward ops.

template <typename Scalar>
VarT<Scalar> matmul(const VarT<Scalar>& a, const VarT<Scalar>& b) {
  detail::require(a.cols() == b.rows(), "matmul: inner dimensions disagree, " + shape_str(a.value()) +
                                            " * " + shape_str(b.value()));
  MatT<Scalar> v = a.value() * b.value();
  return VarT<Scalar>::make("matmul", std::move(v), {a, b}, [a, b](const MatT<Scalar>& g) {
    a.accumulate(g * b.value().transpose());
    b.accumulate(a.value().transpose() * g);
  });
}

template <typename Scalar>
VarT<Scalar> add(const VarT<Scalar>& a, const VarT<Scalar>& b) {
  auto [r, c] = detail::broadcast_shape(a, b, "add");
  MatT<Scalar> v = detail::broadcast_to(a.value(), r, c) + detail::broadcast_to(b.value(), r, c);
  return VarT<Scalar>::make("add", std::move(v), {a, b}, [a, b](const MatT<Scalar>& g) {
    a.accumulate(detail::reduce_to(g, a.rows(), a.cols()));
    b.accumulate(detail::reduce_to(g, b.rows(), b.cols()));
  });
}

template <typename Scalar>
VarT<Scalar> sub(const VarT<Scalar>& a, const VarT<Scalar>& b) {
  auto [r, c] = detail::broadcast_shape(a, b, "sub");
  MatT<Scalar> v = detail::broadcast_to(a.value(), r, c) - detail::broadcast_to(b.value(), r, c);
  return VarT<Scalar>::make("sub", std::move(v), {a, b}, [a, b](const MatT<Scalar>& g) {
    a.accumulate(detail::reduce_to(g, a.rows(), a.cols()));
    b.accumulate((-detail::reduce_to(g, b.rows(), b.cols())).eval());
  });
}

/// Elementwise product with broadcasting.
template <typename Scalar>
VarT<Scalar> mul(const VarT<Scalar>& a, const VarT<Scalar>& b) {
  auto [r, c] = detail::broadcast_shape(a, b, "mul");
  MatT<Scalar> av = detail::broadcast_to(a.value(), r, c);
  MatT<Scalar> bv = detail::broadcast_to(b.value(), r, c);
  MatT<Scalar> v = av.cwiseProduct(bv);
  return VarT<Scalar>::make("mul", std::move(v), {a, b},
                            [a, b, av = std::move(av), bv = std::move(bv)](const MatT<Scalar>& g) {
                              a.accumulate(detail::reduce_to<Scalar>(g.cwiseProduct(bv), a.rows(), a.cols()));
                              b.accumulate(detail::reduce_to<Scalar>(g.cwiseProduct(av), b.rows(), b.cols()));
                            });
}

template <typename Scalar>
VarT<Scalar> square(const VarT<Scalar>& a) {
  MatT<Scalar> v = a.value().array().square();
  return VarT<Scalar>::make("square", std::move(v), {a}, [a](const MatT<Scalar>& g) {
    a.accumulate((Scalar(2) * a.value().array() * g.array()).matrix());
  });
}

/// Elementwise square root. Inputs must be non-negative; the derivative at
/// an exact zero is taken as 0 (subgradient convention, like relu at 0).
template <typename Scalar>
VarT<Scalar> sqrt(const VarT<Scalar>& a) {
  detail::require((a.value().array() >= Scalar(0)).all(), "sqrt: negative input");
  MatT<Scalar> v = a.value().array().sqrt();
  return VarT<Scalar>::make("sqrt", MatT<Scalar>(v), {a}, [a, v](const MatT<Scalar>& g) {
    MatT<Scalar> d = (v.array() > Scalar(0))
                         .select(g.array() * (Scalar(0.5) / v.array()), MatT<Scalar>::Zero(v.rows(), v.cols()).array())
                         .matrix();
    a.accumulate(d);
  });
}

template <typename Scalar>
VarT<Scalar> exp(const VarT<Scalar>& a) {
  MatT<Scalar> v = a.value().array().exp();
  return VarT<Scalar>::make("exp", MatT<Scalar>(v), {a}, [a, v](const MatT<Scalar>& g) {
    a.accumulate(g.cwiseProduct(v));
  });
}

template <typename Scalar>
VarT<Scalar> log(const VarT<Scalar>& a) {
  if (!(a.value().array() > Scalar(0)).all())
    throw std::domain_error("gmvq: log requires strictly positive input");
  MatT<Scalar> v = a.value().array().log();
  return VarT<Scalar>::make("log", std::move(v), {a}, [a](const MatT<Scalar>& g) {
    a.accumulate(g.cwiseQuotient(a.value()));
  });
}

/// softplus(x) = log(1 + e^x), computed without overflow; its derivative is
/// the logistic sigmoid.
template <typename Scalar>
VarT<Scalar> softplus(const VarT<Scalar>& a) {
  MatT<Scalar> v = a.value().unaryExpr([](Scalar x) {
    return std::max(x, Scalar(0)) + std::log1p(std::exp(-std::abs(x)));
  });
  return VarT<Scalar>::make("softplus", std::move(v), {a}, [a](const MatT<Scalar>& g) {
    MatT<Scalar> sg = a.value().unaryExpr([](Scalar x) {
      const Scalar t = std::exp(-std::abs(x));
      return x >= Scalar(0) ? Scalar(1) / (Scalar(1) + t) : t / (Scalar(1) + t);
    });
    a.accumulate(g.cwiseProduct(sg));
  });
}

template <typename Scalar>
VarT<Scalar> relu(const VarT<Scalar>& a) {
  MatT<Scalar> v = a.value().cwiseMax(Scalar(0));
  return VarT<Scalar>::make("relu", std::move(v), {a}, [a](const MatT<Scalar>& g) {
    MatT<Scalar> mask = (a.value().array() > Scalar(0)).template cast<Scalar>();
    a.accumulate(g.cwiseProduct(mask));
  });
}

template <typename Scalar>
VarT<Scalar> scale(const VarT<Scalar>& a, Scalar k) {
  detail::require(std::isfinite(static_cast<double>(k)), "scale: non-finite factor");
  MatT<Scalar> v = k * a.value();
  return VarT<Scalar>::make("scale", std::move(v), {a}, [a, k](const MatT<Scalar>& g) {
    a.accumulate((k * g).eval());
  });
}

template <typename Scalar>
VarT<Scalar> add_const(const VarT<Scalar>& a, Scalar k) {
  detail::require(std::isfinite(static_cast<double>(k)), "add_const: non-finite addend");
  MatT<Scalar> v = a.value().array() + k;
  return VarT<Scalar>::make("add_const", std::move(v), {a}, [a](const MatT<Scalar>& g) {
    a.accumulate(g);
  });
}

/// max(x, lo) elementwise; gradient passes only where x > lo.
template <typename Scalar>
VarT<Scalar> clamp_min(const VarT<Scalar>& a, Scalar lo) {
  MatT<Scalar> v = a.value().cwiseMax(lo);
  return VarT<Scalar>::make("clamp_min", std::move(v), {a}, [a, lo](const MatT<Scalar>& g) {
    MatT<Scalar> mask = (a.value().array() > lo).template cast<Scalar>();
    a.accumulate(g.cwiseProduct(mask));
  });
}

/// Sum of all entries, as a 1x1 node.
template <typename Scalar>
VarT<Scalar> sum(const VarT<Scalar>& a) {
  MatT<Scalar> v(1, 1);
  v(0, 0) = a.value().sum();
  return VarT<Scalar>::make("sum", std::move(v), {a}, [a](const MatT<Scalar>& g) {
    a.accumulate(MatT<Scalar>::Constant(a.rows(), a.cols(), g(0, 0)));
  });
}

/// Mean of all entries, as a 1x1 node.
template <typename Scalar>
VarT<Scalar> mean(const VarT<Scalar>& a) {
  MatT<Scalar> v(1, 1);
  v(0, 0) = a.value().mean();
  return VarT<Scalar>::make("mean", std::move(v), {a}, [a](const MatT<Scalar>& g) {
    const Scalar k = g(0, 0) / static_cast<Scalar>(a.size());
    a.accumulate(MatT<Scalar>::Constant(a.rows(), a.cols(), k));
  });
}

/// Per-row sum, RxC -> Rx1.
template <typename Scalar>
VarT<Scalar> rowwise_sum(const VarT<Scalar>& a) {
  MatT<Scalar> v = a.value().rowwise().sum();
  return VarT<Scalar>::make("rowwise_sum", std::move(v), {a}, [a](const MatT<Scalar>& g) {
    a.accumulate(g.replicate(1, a.cols()));
  });
}

/// Per-column sum, RxC -> 1xC.
template <typename Scalar>
VarT<Scalar> colwise_sum(const VarT<Scalar>& a) {
  MatT<Scalar> v = a.value().colwise().sum();
  return VarT<Scalar>::make("colwise_sum", std::move(v), {a}, [a](const MatT<Scalar>& g) {
    a.accumulate(g.replicate(a.rows(), 1));
  });
}

namespace detail {

template <typename Scalar>
MatT<Scalar> softmax_rows(const MatT<Scalar>& x) {
  MatT<Scalar> s(x.rows(), x.cols());
  for (Index i = 0; i < x.rows(); ++i) {
    const Scalar m = x.row(i).maxCoeff();
    s.row(i) = (x.row(i).array() - m).exp();
    s.row(i) /= s.row(i).sum();
  }
  return s;
}

}  // namespace detail

/// Row-wise softmax with max-subtraction for stability.
template <typename Scalar>
VarT<Scalar> softmax_lastdim(const VarT<Scalar>& a) {
  MatT<Scalar> s = detail::softmax_rows(a.value());
  return VarT<Scalar>::make("softmax_lastdim", MatT<Scalar>(s), {a}, [a, s](const MatT<Scalar>& g) {
    // Per row: ds = s .* (g - <g, s>)
    MatT<Scalar> dot = (g.array() * s.array()).rowwise().sum();
    MatT<Scalar> d = (s.array() * (g.array() - dot.replicate(1, g.cols()).array())).matrix();
    a.accumulate(d);
  });
}

/// Row-wise log-softmax: x - logsumexp(x), the numerically safe log of the
/// categorical probabilities.
template <typename Scalar>
VarT<Scalar> log_softmax_lastdim(const VarT<Scalar>& a) {
  const MatT<Scalar>& x = a.value();
  MatT<Scalar> v(x.rows(), x.cols());
  for (Index i = 0; i < x.rows(); ++i) {
    const Scalar m = x.row(i).maxCoeff();
    const Scalar lse = m + std::log((x.row(i).array() - m).exp().sum());
    v.row(i) = x.row(i).array() - lse;
  }
  MatT<Scalar> s = v.array().exp();
  return VarT<Scalar>::make("log_softmax_lastdim", std::move(v), {a}, [a, s](const MatT<Scalar>& g) {
    MatT<Scalar> gsum = g.rowwise().sum();
    MatT<Scalar> d = (g.array() - s.array() * gsum.replicate(1, g.cols()).array()).matrix();
    a.accumulate(d);
  });
}

/// Columns [c0, c0+n) of a, as a view-copy with scatter-add backward.
template <typename Scalar>
VarT<Scalar> slice_cols(const VarT<Scalar>& a, Index c0, Index n) {
  detail::require(c0 >= 0 && n >= 1 && c0 + n <= a.cols(),
                  "slice_cols: range [" + std::to_string(c0) + ", " + std::to_string(c0 + n) +
                      ") out of bounds for " + shape_str(a.value()));
  MatT<Scalar> v = a.value().middleCols(c0, n);
  return VarT<Scalar>::make("slice_cols", std::move(v), {a}, [a, c0, n](const MatT<Scalar>& g) {
    MatT<Scalar> z = MatT<Scalar>::Zero(a.rows(), a.cols());
    z.middleCols(c0, n) = g;
    a.accumulate(z);
  });
}

/// Gathers rows of a by index (repeats allowed); backward scatter-adds.
template <typename Scalar>
VarT<Scalar> select_rows(const VarT<Scalar>& a, std::vector<Index> idx) {
  for (Index i : idx)
    detail::require(i >= 0 && i < a.rows(), "select_rows: index " + std::to_string(i) + " out of range");
  MatT<Scalar> v(static_cast<Index>(idx.size()), a.cols());
  for (size_t k = 0; k < idx.size(); ++k) v.row(static_cast<Index>(k)) = a.value().row(idx[k]);
  return VarT<Scalar>::make("select_rows", std::move(v), {a}, [a, idx = std::move(idx)](const MatT<Scalar>& g) {
    MatT<Scalar> z = MatT<Scalar>::Zero(a.rows(), a.cols());
    for (size_t k = 0; k < idx.size(); ++k) z.row(idx[k]) += g.row(static_cast<Index>(k));
    a.accumulate(z);
  });
}

/// Pairwise squared Euclidean distances between the rows of z (BxL) and the
/// rows of m (CxL), as a BxC node. Computed by direct subtraction so that
/// identical rows give an exact zero.
template <typename Scalar>
VarT<Scalar> pairwise_sqdist(const VarT<Scalar>& z, const VarT<Scalar>& m) {
  detail::require(z.cols() == m.cols(), "pairwise_sqdist: dimensionality mismatch, " +
                                            shape_str(z.value()) + " vs " + shape_str(m.value()));
  const Index B = z.rows(), C = m.rows();
  MatT<Scalar> v(B, C);
  for (Index b = 0; b < B; ++b)
    for (Index c = 0; c < C; ++c) v(b, c) = (z.value().row(b) - m.value().row(c)).squaredNorm();
  return VarT<Scalar>::make("pairwise_sqdist", std::move(v), {z, m}, [z, m](const MatT<Scalar>& g) {
    MatT<Scalar> grs = g.rowwise().sum();   // Bx1
    MatT<Scalar> gcs = g.colwise().sum();   // 1xC
    // d/dz[b,i] = 2 (z[b,i] * sum_c g[b,c] - (g m)[b,i])
    z.accumulate((Scalar(2) * (z.value().array() * grs.replicate(1, z.cols()).array() -
                               (g * m.value()).array()))
                     .matrix());
    // d/dm[c,i] = 2 (m[c,i] * sum_b g[b,c] - (g^T z)[c,i])
    m.accumulate((Scalar(2) * (m.value().array() * gcs.transpose().replicate(1, m.cols()).array() -
                               (g.transpose() * z.value()).array()))
                     .matrix());
  });
}

/// Per-dimension weighted pairwise squared distance:
///   out[b,c] = sum_i w[b,i] (z[b,i] - m[c,i])^2
/// with w the same shape as z.
template <typename Scalar>
VarT<Scalar> pairwise_weighted_sqdist(const VarT<Scalar>& z, const VarT<Scalar>& w, const VarT<Scalar>& m) {
  detail::require(z.cols() == m.cols() && z.rows() == w.rows() && z.cols() == w.cols(),
                  "pairwise_weighted_sqdist: shape mismatch, z=" + shape_str(z.value()) + " w=" +
                      shape_str(w.value()) + " m=" + shape_str(m.value()));
  const Index B = z.rows(), C = m.rows();
  MatT<Scalar> v(B, C);
  for (Index b = 0; b < B; ++b)
    for (Index c = 0; c < C; ++c)
      v(b, c) = ((z.value().row(b) - m.value().row(c)).array().square() * w.value().row(b).array()).sum();
  return VarT<Scalar>::make("pairwise_weighted_sqdist", std::move(v), {z, w, m}, [z, w, m](const MatT<Scalar>& g) {
    const MatT<Scalar>& zv = z.value();
    const MatT<Scalar>& wv = w.value();
    const MatT<Scalar>& mv = m.value();
    MatT<Scalar> grs = g.rowwise().sum();                       // Bx1
    MatT<Scalar> gm = g * mv;                                   // BxL
    MatT<Scalar> gm2 = g * mv.cwiseProduct(mv);                 // BxL
    MatT<Scalar> rs = grs.replicate(1, zv.cols());
    z.accumulate((Scalar(2) * wv.array() * (zv.array() * rs.array() - gm.array())).matrix());
    w.accumulate((zv.array().square() * rs.array() - Scalar(2) * zv.array() * gm.array() + gm2.array()).matrix());
    MatT<Scalar> gtw = g.transpose() * wv;                      // CxL
    MatT<Scalar> gtwz = g.transpose() * wv.cwiseProduct(zv);    // CxL
    m.accumulate((Scalar(2) * (mv.array() * gtw.array() - gtwz.array())).matrix());
  });
}

template <typename Scalar>
VarT<Scalar> operator+(const VarT<Scalar>& a, const VarT<Scalar>& b) { return add(a, b); }
template <typename Scalar>
VarT<Scalar> operator-(const VarT<Scalar>& a, const VarT<Scalar>& b) { return sub(a, b); }
template <typename Scalar>
VarT<Scalar> operator*(const VarT<Scalar>& a, const VarT<Scalar>& b) { return mul(a, b); }

// ---------------------------------------------------------------------------
// Gradient checking.

struct GradCheckResult {
  double max_rel_error = 0.0;
  /// Set when forward and backward one-sided differences disagree, which
  /// indicates a kink (e.g. relu evaluated at 0). Such points should be
  /// excluded rather than compared against the analytic gradient.
  bool kink_suspected = false;
};

/// Compares the analytic gradient of f (a scalar-valued function of the
/// leaves) against central finite differences at `point`. Returns the max
/// over all leaf coordinates of |analytic - central| / max(1, |central|).
template <typename F>
GradCheckResult grad_check(F&& f, const std::vector<Mat>& point, double h = 1e-5) {
  detail::require(h > 0 && h <= 1e-3, "grad_check: h must be in (0, 1e-3]");
  std::vector<Var> leaves;
  leaves.reserve(point.size());
  for (const auto& m : point) leaves.push_back(Var::leaf(m));
  Var root = f(leaves);
  detail::require(root.rows() == 1 && root.cols() == 1, "grad_check: f must return a scalar");
  backward(root);
  std::vector<Mat> analytic;
  analytic.reserve(leaves.size());
  for (const auto& l : leaves) analytic.push_back(l.grad());

  std::vector<Mat> p = point;
  auto eval_at = [&]() {
    std::vector<Var> ls;
    ls.reserve(p.size());
    for (const auto& m : p) ls.push_back(Var::constant(m));
    return f(ls).value()(0, 0);
  };

  const double f0 = root.value()(0, 0);
  GradCheckResult res;
  for (size_t li = 0; li < p.size(); ++li) {
    double* data = p[li].data();
    for (Index k = 0; k < p[li].size(); ++k) {
      const double orig = data[k];
      data[k] = orig + h;
      const double fp = eval_at();
      data[k] = orig - h;
      const double fm = eval_at();
      data[k] = orig;
      const double central = (fp - fm) / (2 * h);
      const double fwd = (fp - f0) / h;
      const double bwd = (f0 - fm) / h;
      const double denom = std::max(1.0, std::abs(central));
      res.max_rel_error = std::max(res.max_rel_error, std::abs(analytic[li].data()[k] - central) / denom);
      if (std::abs(fwd - bwd) / denom > 1e-2) res.kink_suspected = true;
    }
  }
  return res;
}

}  // namespace gmvq
