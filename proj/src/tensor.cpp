#include "ud/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace ud {

namespace {

std::string shape_str(const Tensor& t) {
  std::string s = "[";
  for (std::size_t i = 0; i < t.shape.size(); ++i) {
    if (i) s += "x";
    s += std::to_string(t.shape[i]);
  }
  return s + "]";
}

std::size_t shape_product(const std::vector<std::size_t>& shape) {
  std::size_t n = 1;
  for (auto d : shape) n *= d;
  return n;
}

TensorPtr make(std::vector<std::size_t> shape, std::vector<double> v) {
  auto t = std::make_shared<Tensor>();
  t->shape = std::move(shape);
  t->values = std::move(v);
  t->grad.assign(t->values.size(), 0.0);
  return t;
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape != b.shape)
    throw DimensionError(std::string(op) + ": shapes " + shape_str(a) +
                         " and " + shape_str(b) + " do not match");
}

}  // namespace

TensorPtr Tensor::scalar(double v) { return make({1}, {v}); }

TensorPtr Tensor::zeros(std::vector<std::size_t> shape) {
  auto n = shape_product(shape);
  return make(std::move(shape), std::vector<double>(n, 0.0));
}

TensorPtr Tensor::vector(std::vector<double> v) {
  auto n = v.size();
  return make({n}, std::move(v));
}

TensorPtr Tensor::matrix(std::size_t rows, std::size_t cols,
                         std::vector<double> v) {
  if (v.size() != rows * cols)
    throw DimensionError("matrix: " + std::to_string(v.size()) +
                         " values for shape [" + std::to_string(rows) + "x" +
                         std::to_string(cols) + "]");
  return make({rows, cols}, std::move(v));
}

TensorPtr Tensor::uniform(std::vector<std::size_t> shape, double lo, double hi,
                          Rng& rng) {
  auto t = zeros(std::move(shape));
  for (auto& v : t->values) v = rng.uniform(lo, hi);
  return t;
}

bool all_finite(const Tensor& t) {
  return std::all_of(t.values.begin(), t.values.end(),
                     [](double v) { return std::isfinite(v); });
}

void Tape::backward(const TensorPtr& loss) {
  if (!loss->is_scalar())
    throw UsageError("backward: loss must be a scalar, got shape " +
                     shape_str(*loss));
  if (consumed_)
    throw UsageError("backward: tape already consumed; build a fresh tape");
  consumed_ = true;
  loss->grad[0] += 1.0;
  for (auto it = steps_.rbegin(); it != steps_.rend(); ++it) (*it)();
}

double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  double e = std::exp(x);
  return e / (1.0 + e);
}

TensorPtr matmul(Tape& t, const TensorPtr& a, const TensorPtr& b) {
  if (a->rank() != 2 || b->rank() != 2 || a->shape[1] != b->shape[0])
    throw DimensionError("matmul: incompatible shapes " + shape_str(*a) +
                         " and " + shape_str(*b));
  std::size_t m = a->shape[0], k = a->shape[1], n = b->shape[1];
  auto out = Tensor::zeros({m, n});
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t p = 0; p < k; ++p) {
      double av = a->at(i, p);
      for (std::size_t j = 0; j < n; ++j) out->at(i, j) += av * b->at(p, j);
    }
  t.record([a, b, out, m, k, n] {
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        double g = out->grad[i * n + j];
        if (g == 0.0) continue;
        for (std::size_t p = 0; p < k; ++p) {
          a->grad[i * k + p] += g * b->at(p, j);
          b->grad[p * n + j] += g * a->at(i, p);
        }
      }
  });
  return out;
}

TensorPtr matvec(Tape& t, const TensorPtr& a, const TensorPtr& x) {
  if (a->rank() != 2 || x->rank() != 1 || a->shape[1] != x->size())
    throw DimensionError("matvec: incompatible shapes " + shape_str(*a) +
                         " and " + shape_str(*x));
  std::size_t m = a->shape[0], k = a->shape[1];
  auto out = Tensor::zeros({m});
  for (std::size_t i = 0; i < m; ++i) {
    double s = 0.0;
    for (std::size_t p = 0; p < k; ++p) s += a->at(i, p) * x->values[p];
    out->values[i] = s;
  }
  t.record([a, x, out, m, k] {
    for (std::size_t i = 0; i < m; ++i) {
      double g = out->grad[i];
      if (g == 0.0) continue;
      for (std::size_t p = 0; p < k; ++p) {
        a->grad[i * k + p] += g * x->values[p];
        x->grad[p] += g * a->at(i, p);
      }
    }
  });
  return out;
}

TensorPtr dot(Tape& t, const TensorPtr& a, const TensorPtr& b) {
  if (a->rank() != 1 || b->rank() != 1 || a->size() != b->size())
    throw DimensionError("dot: incompatible shapes " + shape_str(*a) +
                         " and " + shape_str(*b));
  double s = std::inner_product(a->values.begin(), a->values.end(),
                                b->values.begin(), 0.0);
  auto out = Tensor::scalar(s);
  t.record([a, b, out] {
    double g = out->grad[0];
    for (std::size_t i = 0; i < a->size(); ++i) {
      a->grad[i] += g * b->values[i];
      b->grad[i] += g * a->values[i];
    }
  });
  return out;
}

namespace {

// add / mul with scalar broadcast
template <class Fwd, class Bwd>
TensorPtr binary_elementwise(Tape& t, const TensorPtr& a, const TensorPtr& b,
                             const char* name, Fwd fwd, Bwd bwd) {
  const bool a_scalar = a->is_scalar(), b_scalar = b->is_scalar();
  if (!a_scalar && !b_scalar) require_same_shape(*a, *b, name);
  const auto& shape = a_scalar ? b->shape : a->shape;
  auto out = Tensor::zeros(shape);
  std::size_t n = out->size();
  for (std::size_t i = 0; i < n; ++i) {
    double av = a->values[a_scalar ? 0 : i];
    double bv = b->values[b_scalar ? 0 : i];
    out->values[i] = fwd(av, bv);
  }
  t.record([a, b, out, a_scalar, b_scalar, n, bwd] {
    for (std::size_t i = 0; i < n; ++i) {
      double g = out->grad[i];
      if (g == 0.0) continue;
      double av = a->values[a_scalar ? 0 : i];
      double bv = b->values[b_scalar ? 0 : i];
      auto [da, db] = bwd(av, bv);
      a->grad[a_scalar ? 0 : i] += g * da;
      b->grad[b_scalar ? 0 : i] += g * db;
    }
  });
  return out;
}

template <class Fwd, class Deriv>
TensorPtr unary_elementwise(Tape& t, const TensorPtr& a, Fwd fwd,
                            Deriv deriv) {
  auto out = Tensor::zeros(a->shape);
  std::size_t n = out->size();
  for (std::size_t i = 0; i < n; ++i) out->values[i] = fwd(a->values[i]);
  t.record([a, out, n, deriv] {
    for (std::size_t i = 0; i < n; ++i)
      a->grad[i] += out->grad[i] * deriv(out->values[i]);
  });
  return out;
}

}  // namespace

TensorPtr add(Tape& t, const TensorPtr& a, const TensorPtr& b) {
  return binary_elementwise(
      t, a, b, "add", [](double x, double y) { return x + y; },
      [](double, double) { return std::pair{1.0, 1.0}; });
}

TensorPtr mul(Tape& t, const TensorPtr& a, const TensorPtr& b) {
  return binary_elementwise(
      t, a, b, "mul", [](double x, double y) { return x * y; },
      [](double x, double y) { return std::pair{y, x}; });
}

TensorPtr scale(Tape& t, const TensorPtr& a, double c) {
  return unary_elementwise(
      t, a, [c](double x) { return c * x; }, [c](double) { return c; });
}

TensorPtr tanh_op(Tape& t, const TensorPtr& a) {
  return unary_elementwise(
      t, a, [](double x) { return std::tanh(x); },
      [](double y) { return 1.0 - y * y; });
}

TensorPtr sigmoid_op(Tape& t, const TensorPtr& a) {
  return unary_elementwise(
      t, a, [](double x) { return sigmoid(x); },
      [](double y) { return y * (1.0 - y); });
}

TensorPtr sum(Tape& t, const TensorPtr& a) {
  double s = std::accumulate(a->values.begin(), a->values.end(), 0.0);
  auto out = Tensor::scalar(s);
  t.record([a, out] {
    double g = out->grad[0];
    for (auto& gi : a->grad) gi += g;
  });
  return out;
}

TensorPtr sum_rows(Tape& t, const TensorPtr& a) {
  if (a->rank() != 2) throw DimensionError("sum_rows: rank-2 tensor required");
  std::size_t m = a->shape[0], d = a->shape[1];
  auto out = Tensor::zeros({d});
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < d; ++j) out->values[j] += a->at(i, j);
  t.record([a, out, m, d] {
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < d; ++j)
        a->grad[i * d + j] += out->grad[j];
  });
  return out;
}

TensorPtr softmax(Tape& t, const TensorPtr& s) {
  if (s->rank() != 1 || s->size() == 0)
    throw DimensionError("softmax: non-empty rank-1 tensor required");
  double mx = *std::max_element(s->values.begin(), s->values.end());
  auto out = Tensor::zeros({s->size()});
  double z = 0.0;
  for (std::size_t i = 0; i < s->size(); ++i) {
    out->values[i] = std::exp(s->values[i] - mx);
    z += out->values[i];
  }
  for (auto& v : out->values) v /= z;
  t.record([s, out] {
    double inner = 0.0;
    for (std::size_t i = 0; i < out->size(); ++i)
      inner += out->grad[i] * out->values[i];
    for (std::size_t i = 0; i < out->size(); ++i)
      s->grad[i] += out->values[i] * (out->grad[i] - inner);
  });
  return out;
}

TensorPtr row_scale(Tape& t, const TensorPtr& x, const TensorPtr& alpha) {
  if (x->rank() != 2 || alpha->rank() != 1 || x->shape[0] != alpha->size())
    throw DimensionError("row_scale: " + std::to_string(alpha->size()) +
                         " weights for " + shape_str(*x));
  std::size_t m = x->shape[0], d = x->shape[1];
  auto out = Tensor::zeros({m, d});
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < d; ++j)
      out->at(i, j) = alpha->values[i] * x->at(i, j);
  t.record([x, alpha, out, m, d] {
    for (std::size_t i = 0; i < m; ++i) {
      double ai = alpha->values[i];
      double da = 0.0;
      for (std::size_t j = 0; j < d; ++j) {
        double g = out->grad[i * d + j];
        x->grad[i * d + j] += g * ai;
        da += g * x->at(i, j);
      }
      alpha->grad[i] += da;
    }
  });
  return out;
}

TensorPtr concat(Tape& t, const std::vector<TensorPtr>& vecs) {
  if (vecs.empty()) throw UsageError("concat: no inputs");
  std::size_t n = 0;
  for (const auto& v : vecs) n += v->size();
  auto out = Tensor::zeros({n});
  std::size_t off = 0;
  for (const auto& v : vecs) {
    std::copy(v->values.begin(), v->values.end(), out->values.begin() + off);
    off += v->size();
  }
  t.record([vecs, out] {
    std::size_t off = 0;
    for (const auto& v : vecs) {
      for (std::size_t i = 0; i < v->size(); ++i)
        v->grad[i] += out->grad[off + i];
      off += v->size();
    }
  });
  return out;
}

TensorPtr flatten(Tape& t, const TensorPtr& a) {
  auto out = Tensor::vector(a->values);
  t.record([a, out] {
    for (std::size_t i = 0; i < a->size(); ++i) a->grad[i] += out->grad[i];
  });
  return out;
}

TensorPtr stack_rows(Tape& t, const std::vector<TensorPtr>& rows) {
  if (rows.empty()) throw UsageError("stack_rows: no inputs");
  std::size_t d = rows[0]->size();
  for (const auto& r : rows)
    if (r->rank() != 1 || r->size() != d)
      throw DimensionError("stack_rows: row lengths differ");
  auto out = Tensor::zeros({rows.size(), d});
  for (std::size_t i = 0; i < rows.size(); ++i)
    std::copy(rows[i]->values.begin(), rows[i]->values.end(),
              out->values.begin() + i * d);
  t.record([rows, out, d] {
    for (std::size_t i = 0; i < rows.size(); ++i)
      for (std::size_t j = 0; j < d; ++j)
        rows[i]->grad[j] += out->grad[i * d + j];
  });
  return out;
}

TensorPtr gather_rows(Tape& t, const TensorPtr& a,
                      const std::vector<std::size_t>& idx) {
  if (a->rank() != 2) throw DimensionError("gather_rows: rank-2 required");
  std::size_t d = a->shape[1];
  for (auto i : idx)
    if (i >= a->shape[0]) throw UsageError("gather_rows: index out of range");
  auto out = Tensor::zeros({idx.size(), d});
  for (std::size_t r = 0; r < idx.size(); ++r)
    for (std::size_t j = 0; j < d; ++j) out->at(r, j) = a->at(idx[r], j);
  t.record([a, out, idx, d] {
    for (std::size_t r = 0; r < idx.size(); ++r)
      for (std::size_t j = 0; j < d; ++j)
        a->grad[idx[r] * d + j] += out->grad[r * d + j];
  });
  return out;
}

TensorPtr pad_rows(Tape& t, const TensorPtr& a, std::size_t target) {
  if (a->rank() != 2) throw DimensionError("pad_rows: rank-2 required");
  std::size_t m = a->shape[0], d = a->shape[1];
  if (target < m) throw UsageError("pad_rows: target smaller than input");
  auto out = Tensor::zeros({target, d});
  std::copy(a->values.begin(), a->values.end(), out->values.begin());
  t.record([a, out, m, d] {
    for (std::size_t i = 0; i < m * d; ++i) a->grad[i] += out->grad[i];
  });
  return out;
}

TensorPtr kmax_per_column(Tape& t, const TensorPtr& a, std::size_t k,
                          std::vector<std::vector<std::size_t>>* picks) {
  if (a->rank() != 2) throw DimensionError("kmax_per_column: rank-2 required");
  if (k < 1) throw UsageError("kmax_per_column: k must be >= 1");
  std::size_t m = a->shape[0], d = a->shape[1];
  std::size_t take = std::min(k, m);
  auto out = Tensor::zeros({k, d});
  std::vector<std::vector<std::size_t>> sel(d);
  std::vector<std::size_t> order(m);
  for (std::size_t c = 0; c < d; ++c) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    // largest first; ties go to the earlier position
    std::partial_sort(order.begin(), order.begin() + take, order.end(),
                      [&](std::size_t i, std::size_t j) {
                        double vi = a->at(i, c), vj = a->at(j, c);
                        return vi != vj ? vi > vj : i < j;
                      });
    sel[c].assign(order.begin(), order.begin() + take);
    std::sort(sel[c].begin(), sel[c].end());  // restore sequence order
    for (std::size_t r = 0; r < take; ++r) out->at(r, c) = a->at(sel[c][r], c);
  }
  t.record([a, out, sel, d, take] {
    for (std::size_t c = 0; c < d; ++c)
      for (std::size_t r = 0; r < take; ++r)
        a->grad[sel[c][r] * d + c] += out->grad[r * d + c];
  });
  if (picks) *picks = std::move(sel);
  return out;
}

TensorPtr bce_with_logits(Tape& t, const TensorPtr& z, double y) {
  if (!z->is_scalar()) throw UsageError("bce_with_logits: scalar logit required");
  double zv = z->values[0];
  // log(1 + e^z) - y*z, computed stably
  double loss = std::max(zv, 0.0) - zv * y + std::log1p(std::exp(-std::abs(zv)));
  auto out = Tensor::scalar(loss);
  t.record([z, out, y] { z->grad[0] += out->grad[0] * (sigmoid(z->values[0]) - y); });
  return out;
}

}  // namespace ud
