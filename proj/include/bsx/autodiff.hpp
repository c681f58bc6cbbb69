#pragma once

#include <functional>
#include <vector>

#include "bsx/tensor.hpp"

namespace bsx::ad {

// Handle into a Tape. Cheap to copy; valid only for the tape that issued it.
struct Var {
  int idx = -1;
  bool valid() const { return idx >= 0; }
};

// Reverse-mode gradient tape over dense matrices. Operations record eagerly;
// backward() replays them once in reverse creation order, which is a reverse
// topological order for a define-by-run graph. Gradients accumulate
// additively across fan-out. A tape is single-threaded by contract.
class Tape {
 public:
  // Leaf holding an input value; participates in gradients like any node.
  Var leaf(Matrix value);
  // Leaf registered as a trainable parameter (kept in registration order).
  Var param(Matrix value);

  // a[m x k] * b[k x n]. Accumulates each output entry in ascending-k order,
  // so results are bit-identical to a naive triple loop.
  Var matmul(Var a, Var b);
  Var add(Var a, Var b);
  Var sub(Var a, Var b);
  Var hadamard(Var a, Var b);
  // m + v replicated across columns (v is rows(m) x 1).
  Var add_colwise(Var m, Var v);
  Var scale(Var a, double c);
  Var add_n(const std::vector<Var>& terms);
  Var sigmoid(Var a);
  Var tanh(Var a);
  // Stabilized softmax over an n x 1 vector.
  Var softmax(Var logits);
  // Vertical stack [a; b].
  Var concat_rows(Var a, Var b);
  // Horizontal stack of equally-tall columns.
  Var concat_cols(const std::vector<Var>& cols);
  Var transpose(Var a);
  // Row i of a as a column vector.
  Var row_vec(Var a, Index i);
  Var sum(Var a);
  // Mean of squared differences; pred and truth must have equal shapes.
  Var mse(Var pred, Var truth);

  const Matrix& value(Var v) const;
  // Gradient of the last backward() loss w.r.t. v; zeros if v was not
  // reached.
  Matrix grad(Var v) const;
  const std::vector<Var>& params() const { return params_; }

  // Reverse sweep from a scalar (1x1) loss. Parameters are untouched;
  // gradients of a previous sweep are discarded.
  void backward(Var loss);

  std::size_t size() const { return nodes_.size(); }
  void clear();

 private:
  enum class Op {
    kLeaf,
    kMatMul,
    kAdd,
    kSub,
    kHadamard,
    kAddColwise,
    kScale,
    kAddN,
    kSigmoid,
    kTanh,
    kSoftmax,
    kConcatRows,
    kConcatCols,
    kTranspose,
    kRowVec,
    kSum,
  };

  struct Node {
    Op op;
    Matrix value;
    Matrix grad;  // empty until the backward sweep reaches the node
    std::vector<int> args;
    Index iattr = 0;
    double dattr = 0.0;
  };

  Var push(Op op, Matrix value, std::vector<int> args, Index iattr = 0,
           double dattr = 0.0);
  void accumulate(int idx, const Matrix& g);
  void backstep(Node& node);
  const Node& at(Var v) const;

  std::vector<Node> nodes_;
  std::vector<Var> params_;
};

// Max relative gradient error of a scalar function against central finite
// differences, over every entry of every parameter:
//   |analytic - numeric| / max(1e-8, |analytic| + |numeric|).
// `build` must construct the loss deterministically from the tape-registered
// parameters (register them in the order given).
double grad_check(
    const std::function<Var(Tape&, const std::vector<Var>&)>& build,
    std::vector<Matrix> params, double step = 1e-5);

}  // namespace bsx::ad
