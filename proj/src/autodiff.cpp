#include "bsx/autodiff.hpp"

#include <algorithm>
#include <cmath>

#include "bsx/errors.hpp"

namespace bsx::ad {

namespace {

void require(bool ok, const std::string& msg) {
  if (!ok) throw NumericError(msg);
}

}  // namespace

Var Tape::push(Op op, Matrix value, std::vector<int> args, Index iattr,
               double dattr) {
  Node node;
  node.op = op;
  node.value = std::move(value);
  node.args = std::move(args);
  node.iattr = iattr;
  node.dattr = dattr;
  nodes_.push_back(std::move(node));
  return Var{static_cast<int>(nodes_.size()) - 1};
}

const Tape::Node& Tape::at(Var v) const {
  require(v.valid() && v.idx < static_cast<int>(nodes_.size()),
          "autodiff: dangling variable handle");
  return nodes_[static_cast<std::size_t>(v.idx)];
}

Var Tape::leaf(Matrix value) { return push(Op::kLeaf, std::move(value), {}); }

Var Tape::param(Matrix value) {
  Var v = leaf(std::move(value));
  params_.push_back(v);
  return v;
}

Var Tape::matmul(Var a, Var b) {
  const Matrix& A = at(a).value;
  const Matrix& B = at(b).value;
  require(A.cols() == B.rows(), "matmul: inner dimensions differ, " +
                                    shape_str(A) + " vs " + shape_str(B));
  Matrix C = Matrix::Zero(A.rows(), B.cols());
  for (Index j = 0; j < B.cols(); ++j)
    for (Index k = 0; k < A.cols(); ++k)
      C.col(j) += A.col(k) * B(k, j);
  return push(Op::kMatMul, std::move(C), {a.idx, b.idx});
}

Var Tape::add(Var a, Var b) {
  const Matrix& A = at(a).value;
  const Matrix& B = at(b).value;
  require(A.rows() == B.rows() && A.cols() == B.cols(),
          "add: shape mismatch, " + shape_str(A) + " vs " + shape_str(B));
  return push(Op::kAdd, A + B, {a.idx, b.idx});
}

Var Tape::sub(Var a, Var b) {
  const Matrix& A = at(a).value;
  const Matrix& B = at(b).value;
  require(A.rows() == B.rows() && A.cols() == B.cols(),
          "sub: shape mismatch, " + shape_str(A) + " vs " + shape_str(B));
  return push(Op::kSub, A - B, {a.idx, b.idx});
}

Var Tape::hadamard(Var a, Var b) {
  const Matrix& A = at(a).value;
  const Matrix& B = at(b).value;
  require(A.rows() == B.rows() && A.cols() == B.cols(),
          "pointwise_mul: shape mismatch, " + shape_str(A) + " vs " +
              shape_str(B));
  return push(Op::kHadamard, A.cwiseProduct(B), {a.idx, b.idx});
}

Var Tape::add_colwise(Var m, Var v) {
  const Matrix& M = at(m).value;
  const Matrix& V = at(v).value;
  require(V.cols() == 1 && V.rows() == M.rows(),
          "add_colwise: expected column vector of height " +
              std::to_string(M.rows()) + ", got " + shape_str(V));
  Matrix out = M;
  out.colwise() += V.col(0);
  return push(Op::kAddColwise, std::move(out), {m.idx, v.idx});
}

Var Tape::scale(Var a, double c) {
  return push(Op::kScale, at(a).value * c, {a.idx}, 0, c);
}

Var Tape::add_n(const std::vector<Var>& terms) {
  require(!terms.empty(), "add_n: empty term list");
  Matrix acc = at(terms[0]).value;
  std::vector<int> args{terms[0].idx};
  for (std::size_t i = 1; i < terms.size(); ++i) {
    const Matrix& T = at(terms[i]).value;
    require(T.rows() == acc.rows() && T.cols() == acc.cols(),
            "add_n: shape mismatch, " + shape_str(acc) + " vs " +
                shape_str(T));
    acc += T;
    args.push_back(terms[i].idx);
  }
  return push(Op::kAddN, std::move(acc), std::move(args));
}

Var Tape::sigmoid(Var a) {
  const Matrix& A = at(a).value;
  Matrix out = A.unaryExpr([](double x) { return 1.0 / (1.0 + std::exp(-x)); });
  return push(Op::kSigmoid, std::move(out), {a.idx});
}

Var Tape::tanh(Var a) {
  Matrix out = at(a).value.unaryExpr([](double x) { return std::tanh(x); });
  return push(Op::kTanh, std::move(out), {a.idx});
}

Var Tape::softmax(Var logits) {
  const Matrix& L = at(logits).value;
  require(L.cols() == 1 && L.rows() >= 1,
          "softmax: expected nonempty column vector, got " + shape_str(L));
  const double m = L.maxCoeff();
  Matrix e = L.unaryExpr([m](double x) { return std::exp(x - m); });
  double z = 0.0;
  for (Index i = 0; i < e.rows(); ++i) z += e(i, 0);
  return push(Op::kSoftmax, e / z, {logits.idx});
}

Var Tape::concat_rows(Var a, Var b) {
  const Matrix& A = at(a).value;
  const Matrix& B = at(b).value;
  require(A.cols() == B.cols(), "concat_rows: column counts differ, " +
                                    shape_str(A) + " vs " + shape_str(B));
  Matrix out(A.rows() + B.rows(), A.cols());
  out.topRows(A.rows()) = A;
  out.bottomRows(B.rows()) = B;
  return push(Op::kConcatRows, std::move(out), {a.idx, b.idx}, A.rows());
}

Var Tape::concat_cols(const std::vector<Var>& cols) {
  require(!cols.empty(), "concat_cols: empty column list");
  const Index rows = at(cols[0]).value.rows();
  Index total = 0;
  std::vector<int> args;
  for (Var c : cols) {
    require(at(c).value.rows() == rows, "concat_cols: row counts differ");
    total += at(c).value.cols();
    args.push_back(c.idx);
  }
  Matrix out(rows, total);
  Index off = 0;
  for (Var c : cols) {
    const Matrix& C = at(c).value;
    out.middleCols(off, C.cols()) = C;
    off += C.cols();
  }
  return push(Op::kConcatCols, std::move(out), std::move(args));
}

Var Tape::transpose(Var a) {
  return push(Op::kTranspose, at(a).value.transpose(), {a.idx});
}

Var Tape::row_vec(Var a, Index i) {
  const Matrix& A = at(a).value;
  require(i >= 0 && i < A.rows(),
          "row_vec: row " + std::to_string(i) + " out of range for " +
              shape_str(A));
  return push(Op::kRowVec, A.row(i).transpose(), {a.idx}, i);
}

Var Tape::sum(Var a) {
  double s = 0.0;
  const Matrix& A = at(a).value;
  for (Index j = 0; j < A.cols(); ++j)
    for (Index i = 0; i < A.rows(); ++i) s += A(i, j);
  Matrix out(1, 1);
  out(0, 0) = s;
  return push(Op::kSum, std::move(out), {a.idx});
}

Var Tape::mse(Var pred, Var truth) {
  const Matrix& P = at(pred).value;
  const Matrix& T = at(truth).value;
  require(P.rows() == T.rows() && P.cols() == T.cols(),
          "mse: shape mismatch, " + shape_str(P) + " vs " + shape_str(T));
  Var d = sub(pred, truth);
  return scale(sum(hadamard(d, d)), 1.0 / static_cast<double>(P.size()));
}

const Matrix& Tape::value(Var v) const { return at(v).value; }

Matrix Tape::grad(Var v) const {
  const Node& n = at(v);
  if (n.grad.size() == 0) return Matrix::Zero(n.value.rows(), n.value.cols());
  return n.grad;
}

void Tape::accumulate(int idx, const Matrix& g) {
  Node& n = nodes_[static_cast<std::size_t>(idx)];
  if (n.grad.size() == 0)
    n.grad = g;
  else
    n.grad += g;
}

void Tape::backstep(Node& node) {
  const Matrix& g = node.grad;
  switch (node.op) {
    case Op::kLeaf:
      break;
    case Op::kMatMul: {
      const Matrix& A = nodes_[node.args[0]].value;
      const Matrix& B = nodes_[node.args[1]].value;
      accumulate(node.args[0], g * B.transpose());
      accumulate(node.args[1], A.transpose() * g);
      break;
    }
    case Op::kAdd:
      accumulate(node.args[0], g);
      accumulate(node.args[1], g);
      break;
    case Op::kSub:
      accumulate(node.args[0], g);
      accumulate(node.args[1], -g);
      break;
    case Op::kHadamard: {
      const Matrix& A = nodes_[node.args[0]].value;
      const Matrix& B = nodes_[node.args[1]].value;
      accumulate(node.args[0], g.cwiseProduct(B));
      accumulate(node.args[1], g.cwiseProduct(A));
      break;
    }
    case Op::kAddColwise:
      accumulate(node.args[0], g);
      accumulate(node.args[1], g.rowwise().sum());
      break;
    case Op::kScale:
      accumulate(node.args[0], g * node.dattr);
      break;
    case Op::kAddN:
      for (int a : node.args) accumulate(a, g);
      break;
    case Op::kSigmoid: {
      const Matrix& y = node.value;
      accumulate(node.args[0],
                 g.cwiseProduct(y.cwiseProduct(Matrix::Ones(y.rows(), y.cols()) - y)));
      break;
    }
    case Op::kTanh: {
      const Matrix& y = node.value;
      accumulate(node.args[0],
                 g.cwiseProduct(Matrix::Ones(y.rows(), y.cols()) - y.cwiseProduct(y)));
      break;
    }
    case Op::kSoftmax: {
      const Matrix& y = node.value;
      const double dot = (y.array() * g.array()).sum();
      accumulate(node.args[0], (y.array() * (g.array() - dot)).matrix());
      break;
    }
    case Op::kConcatRows: {
      const Index split = node.iattr;
      accumulate(node.args[0], g.topRows(split));
      accumulate(node.args[1], g.bottomRows(g.rows() - split));
      break;
    }
    case Op::kConcatCols: {
      Index off = 0;
      for (int a : node.args) {
        const Index w = nodes_[a].value.cols();
        accumulate(a, g.middleCols(off, w));
        off += w;
      }
      break;
    }
    case Op::kTranspose:
      accumulate(node.args[0], g.transpose());
      break;
    case Op::kRowVec: {
      const Matrix& A = nodes_[node.args[0]].value;
      Matrix ga = Matrix::Zero(A.rows(), A.cols());
      ga.row(node.iattr) = g.transpose();
      accumulate(node.args[0], ga);
      break;
    }
    case Op::kSum: {
      const Matrix& A = nodes_[node.args[0]].value;
      accumulate(node.args[0],
                 Matrix::Constant(A.rows(), A.cols(), g(0, 0)));
      break;
    }
  }
}

void Tape::backward(Var loss) {
  const Node& top = at(loss);
  require(top.value.rows() == 1 && top.value.cols() == 1,
          "backward: loss must be scalar, got " + shape_str(top.value));
  for (Node& n : nodes_) n.grad.resize(0, 0);
  nodes_[static_cast<std::size_t>(loss.idx)].grad = Matrix::Ones(1, 1);
  for (int i = loss.idx; i >= 0; --i) {
    Node& n = nodes_[static_cast<std::size_t>(i)];
    if (n.grad.size() == 0) continue;  // unreachable from the loss
    backstep(n);
  }
}

void Tape::clear() {
  nodes_.clear();
  params_.clear();
}

double grad_check(
    const std::function<Var(Tape&, const std::vector<Var>&)>& build,
    std::vector<Matrix> params, double step) {
  auto evaluate = [&](const std::vector<Matrix>& p) {
    Tape tape;
    std::vector<Var> vars;
    vars.reserve(p.size());
    for (const Matrix& m : p) vars.push_back(tape.param(m));
    Var loss = build(tape, vars);
    return tape.value(loss)(0, 0);
  };

  Tape tape;
  std::vector<Var> vars;
  vars.reserve(params.size());
  for (const Matrix& m : params) vars.push_back(tape.param(m));
  Var loss = build(tape, vars);
  tape.backward(loss);
  std::vector<Matrix> analytic;
  analytic.reserve(vars.size());
  for (Var v : vars) analytic.push_back(tape.grad(v));

  double worst = 0.0;
  for (std::size_t pi = 0; pi < params.size(); ++pi) {
    Matrix& m = params[pi];
    for (Index i = 0; i < m.rows(); ++i) {
      for (Index j = 0; j < m.cols(); ++j) {
        const double keep = m(i, j);
        m(i, j) = keep + step;
        const double up = evaluate(params);
        m(i, j) = keep - step;
        const double down = evaluate(params);
        m(i, j) = keep;
        const double numeric = (up - down) / (2.0 * step);
        const double a = analytic[pi](i, j);
        const double rel =
            std::abs(a - numeric) /
            std::max(1e-8, std::abs(a) + std::abs(numeric));
        worst = std::max(worst, rel);
      }
    }
  }
  return worst;
}

}  // namespace bsx::ad
