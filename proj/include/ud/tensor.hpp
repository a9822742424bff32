#pragma once

#include <cstddef>
#include <functional>
#include <initializer_list>
#include <memory>
#include <vector>

#include "ud/errors.hpp"
#include "ud/rng.hpp"

namespace ud {

struct Tensor;
using TensorPtr = std::shared_ptr<Tensor>;

// Dense rank-1 or rank-2 array of doubles with a same-shape gradient buffer.
// Scalars are rank-1 tensors of size 1.
struct Tensor {
  std::vector<std::size_t> shape;  // {n} or {rows, cols}
  std::vector<double> values;      // row-major
  std::vector<double> grad;        // same length as values, zero-initialized

  std::size_t rank() const { return shape.size(); }
  std::size_t size() const { return values.size(); }
  std::size_t rows() const { return shape[0]; }
  std::size_t cols() const { return rank() == 2 ? shape[1] : 1; }
  bool is_scalar() const { return rank() == 1 && values.size() == 1; }

  double& at(std::size_t i) { return values[i]; }
  double& at(std::size_t r, std::size_t c) { return values[r * shape[1] + c]; }
  double at(std::size_t r, std::size_t c) const {
    return values[r * shape[1] + c];
  }

  void zero_grad() { std::fill(grad.begin(), grad.end(), 0.0); }

  static TensorPtr scalar(double v);
  static TensorPtr zeros(std::vector<std::size_t> shape);
  static TensorPtr vector(std::vector<double> v);
  static TensorPtr matrix(std::size_t rows, std::size_t cols,
                          std::vector<double> v);
  // seeded uniform in [lo, hi], filled row-major
  static TensorPtr uniform(std::vector<std::size_t> shape, double lo,
                           double hi, Rng& rng);
};

bool all_finite(const Tensor& t);

// Record of executed primitive operations. Each op pushes a backward closure;
// backward() replays them in reverse, accumulating into .grad buffers.
class Tape {
 public:
  void record(std::function<void()> fn) { steps_.push_back(std::move(fn)); }

  // loss must be a scalar produced by ops recorded on this tape.
  // A second call without a fresh tape is a usage error.
  void backward(const TensorPtr& loss);

  std::size_t num_ops() const { return steps_.size(); }

 private:
  std::vector<std::function<void()>> steps_;
  bool consumed_ = false;
};

// ---- primitive differentiable operations ----

TensorPtr matmul(Tape& t, const TensorPtr& a, const TensorPtr& b);
// A[m x k] * x[k] -> [m]
TensorPtr matvec(Tape& t, const TensorPtr& a, const TensorPtr& x);
TensorPtr dot(Tape& t, const TensorPtr& a, const TensorPtr& b);

// elementwise; same shape, or either argument a scalar (broadcast)
TensorPtr add(Tape& t, const TensorPtr& a, const TensorPtr& b);
TensorPtr mul(Tape& t, const TensorPtr& a, const TensorPtr& b);
TensorPtr scale(Tape& t, const TensorPtr& a, double c);
TensorPtr tanh_op(Tape& t, const TensorPtr& a);
TensorPtr sigmoid_op(Tape& t, const TensorPtr& a);

TensorPtr sum(Tape& t, const TensorPtr& a);       // -> scalar
TensorPtr sum_rows(Tape& t, const TensorPtr& a);  // [m x d] -> [d]

// numerically stable softmax over a rank-1 tensor (max subtraction)
TensorPtr softmax(Tape& t, const TensorPtr& s);

// row i of the output = alpha[i] * x row i
TensorPtr row_scale(Tape& t, const TensorPtr& x, const TensorPtr& alpha);

TensorPtr concat(Tape& t, const std::vector<TensorPtr>& vecs);  // -> vector
TensorPtr flatten(Tape& t, const TensorPtr& a);                 // row-major
TensorPtr stack_rows(Tape& t, const std::vector<TensorPtr>& rows);
TensorPtr gather_rows(Tape& t, const TensorPtr& a,
                      const std::vector<std::size_t>& idx);
// zero rows appended (or gradient-transparent truncation never happens;
// target >= rows required)
TensorPtr pad_rows(Tape& t, const TensorPtr& a, std::size_t target);

// per column: the k largest values, kept in original row order; zero-padded
// when the input has fewer than k rows. picks, when given, receives for each
// column the selected row indices in output order.
TensorPtr kmax_per_column(Tape& t, const TensorPtr& a, std::size_t k,
                          std::vector<std::vector<std::size_t>>* picks);

// binary cross-entropy of sigmoid(z) against label y, stable form.
// d loss / d z = sigmoid(z) - y.
TensorPtr bce_with_logits(Tape& t, const TensorPtr& z, double y);

double sigmoid(double x);

}  // namespace ud
