#include "hinctr/tape.hpp"

#include <cassert>
#include <cmath>
#include <sstream>

namespace hinctr {

namespace {

void require(bool ok, const std::string& msg) {
  if (!ok) throw NumericError(msg);
}

double stable_sigmoid(double x) {
  if (x >= 0.0) {
    return 1.0 / (1.0 + std::exp(-x));
  }
  double e = std::exp(x);
  return e / (1.0 + e);
}

// Stand-in for -inf inside the stabilised softmax; masked positions are
// overwritten with exact zeros afterwards, so the sentinel never leaks.
constexpr double kMaskedLogit = -1e30;

}  // namespace

std::string Tensor::shape_str() const {
  std::ostringstream os;
  os << "(";
  for (size_t i = 0; i < shape_.size(); ++i) os << (i ? "," : "") << shape_[i];
  os << ")";
  return os.str();
}

bool Tensor::all_finite() const {
  for (double v : data_)
    if (!std::isfinite(v)) return false;
  return true;
}

Tape::NodeId Tape::push(Node n) {
#ifndef NDEBUG
  assert(n.val.all_finite());
#endif
  nodes_.push_back(std::move(n));
  return static_cast<NodeId>(nodes_.size()) - 1;
}

Tensor& Tape::grad_buf(NodeId id) {
  Node& n = node(id);
  if (!n.grad_set) {
    n.grad = Tensor(n.val.shape());
    n.grad_set = true;
  }
  return n.grad;
}

const Tensor& Tape::grad(NodeId id) const {
  const Node& n = nodes_.at(id);
  if (!n.grad_set) throw NumericError("gradient not available for node");
  return n.grad;
}

Tape::NodeId Tape::constant(Tensor v) {
  Node n;
  n.op = Op::Constant;
  n.val = std::move(v);
  return push(std::move(n));
}

Tape::NodeId Tape::param(Parameter* p) {
  Node n;
  n.op = Op::Param;
  n.parameter = p;
  n.val = p->value;
  return push(std::move(n));
}

Tape::NodeId Tape::matmul(NodeId a, NodeId b) {
  const Tensor& A = value(a);
  const Tensor& B = value(b);
  require(A.rank() == 2 && B.rank() == 2 && A.cols() == B.rows(),
          "matmul shape mismatch " + A.shape_str() + " x " + B.shape_str());
  Tensor C({A.rows(), B.cols()});
  const int p = A.rows(), q = A.cols(), r = B.cols();
  for (int i = 0; i < p; ++i)
    for (int k = 0; k < q; ++k) {
      double aik = A.at(i, k);
      if (aik == 0.0) continue;
      for (int j = 0; j < r; ++j) C.at(i, j) += aik * B.at(k, j);
    }
  Node n;
  n.op = Op::MatMul;
  n.parents = {a, b};
  n.val = std::move(C);
  return push(std::move(n));
}

Tape::NodeId Tape::matmul_t(NodeId a, NodeId b) {
  const Tensor& A = value(a);
  const Tensor& B = value(b);
  require(A.rank() == 2 && B.rank() == 2 && A.cols() == B.cols(),
          "matmul_t shape mismatch " + A.shape_str() + " x " + B.shape_str() + "^T");
  Tensor C({A.rows(), B.rows()});
  const int p = A.rows(), q = A.cols(), r = B.rows();
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < r; ++j) {
      double s = 0.0;
      for (int k = 0; k < q; ++k) s += A.at(i, k) * B.at(j, k);
      C.at(i, j) = s;
    }
  Node n;
  n.op = Op::MatMulT;
  n.parents = {a, b};
  n.val = std::move(C);
  return push(std::move(n));
}

Tape::NodeId Tape::matvec(NodeId m, NodeId v) {
  const Tensor& M = value(m);
  const Tensor& x = value(v);
  require(M.rank() == 2 && x.rank() == 1 && M.cols() == x.dim(0),
          "matvec shape mismatch " + M.shape_str() + " x " + x.shape_str());
  Tensor y({M.rows()});
  for (int i = 0; i < M.rows(); ++i) {
    double s = 0.0;
    for (int k = 0; k < M.cols(); ++k) s += M.at(i, k) * x[k];
    y[i] = s;
  }
  Node n;
  n.op = Op::MatVec;
  n.parents = {m, v};
  n.val = std::move(y);
  return push(std::move(n));
}

Tape::NodeId Tape::add(NodeId a, NodeId b) {
  const Tensor& A = value(a);
  const Tensor& B = value(b);
  require(A.same_shape(B), "add shape mismatch " + A.shape_str() + " vs " + B.shape_str());
  Tensor C(A.shape());
  for (size_t i = 0; i < A.size(); ++i) C[i] = A[i] + B[i];
  Node n;
  n.op = Op::Add;
  n.parents = {a, b};
  n.val = std::move(C);
  return push(std::move(n));
}

Tape::NodeId Tape::sub(NodeId a, NodeId b) {
  const Tensor& A = value(a);
  const Tensor& B = value(b);
  require(A.same_shape(B), "sub shape mismatch " + A.shape_str() + " vs " + B.shape_str());
  Tensor C(A.shape());
  for (size_t i = 0; i < A.size(); ++i) C[i] = A[i] - B[i];
  Node n;
  n.op = Op::Sub;
  n.parents = {a, b};
  n.val = std::move(C);
  return push(std::move(n));
}

Tape::NodeId Tape::hadamard(NodeId a, NodeId b) {
  const Tensor& A = value(a);
  const Tensor& B = value(b);
  require(A.same_shape(B), "hadamard shape mismatch " + A.shape_str() + " vs " + B.shape_str());
  Tensor C(A.shape());
  for (size_t i = 0; i < A.size(); ++i) C[i] = A[i] * B[i];
  Node n;
  n.op = Op::Hadamard;
  n.parents = {a, b};
  n.val = std::move(C);
  return push(std::move(n));
}

Tape::NodeId Tape::scale(NodeId a, double c) {
  const Tensor& A = value(a);
  Tensor C(A.shape());
  for (size_t i = 0; i < A.size(); ++i) C[i] = A[i] * c;
  Node n;
  n.op = Op::Scale;
  n.parents = {a};
  n.c = c;
  n.val = std::move(C);
  return push(std::move(n));
}

Tape::NodeId Tape::add_bias(NodeId m, NodeId bias) {
  const Tensor& M = value(m);
  const Tensor& b = value(bias);
  require(M.rank() == 2 && b.rank() == 1 && M.cols() == b.dim(0),
          "add_bias shape mismatch " + M.shape_str() + " + " + b.shape_str());
  Tensor C(M.shape());
  for (int i = 0; i < M.rows(); ++i)
    for (int j = 0; j < M.cols(); ++j) C.at(i, j) = M.at(i, j) + b[j];
  Node n;
  n.op = Op::AddBias;
  n.parents = {m, bias};
  n.val = std::move(C);
  return push(std::move(n));
}

Tape::NodeId Tape::relu(NodeId a) {
  const Tensor& A = value(a);
  Tensor C(A.shape());
  for (size_t i = 0; i < A.size(); ++i) C[i] = A[i] > 0.0 ? A[i] : 0.0;
  Node n;
  n.op = Op::Relu;
  n.parents = {a};
  n.saved = A;  // sign pattern
  n.val = std::move(C);
  return push(std::move(n));
}

Tape::NodeId Tape::sigmoid(NodeId a) {
  const Tensor& A = value(a);
  Tensor C(A.shape());
  for (size_t i = 0; i < A.size(); ++i) C[i] = stable_sigmoid(A[i]);
  Node n;
  n.op = Op::Sigmoid;
  n.parents = {a};
  n.val = std::move(C);
  return push(std::move(n));
}

Tape::NodeId Tape::concat_vec(const std::vector<NodeId>& parts) {
  require(!parts.empty(), "concat_vec of nothing");
  int total = 0;
  for (NodeId p : parts) {
    require(value(p).rank() == 1, "concat_vec expects rank-1 parts");
    total += value(p).dim(0);
  }
  Tensor C({total});
  int at = 0;
  for (NodeId p : parts) {
    const Tensor& x = value(p);
    for (int i = 0; i < x.dim(0); ++i) C[at + i] = x[i];
    at += x.dim(0);
  }
  Node n;
  n.op = Op::ConcatVec;
  n.parents = parts;
  n.val = std::move(C);
  return push(std::move(n));
}

Tape::NodeId Tape::concat_rows(const std::vector<NodeId>& parts) {
  require(!parts.empty(), "concat_rows of nothing");
  const int d = value(parts[0]).dim(0);
  for (NodeId p : parts)
    require(value(p).rank() == 1 && value(p).dim(0) == d,
            "concat_rows expects rank-1 parts of equal width");
  Tensor C({static_cast<int>(parts.size()), d});
  for (size_t r = 0; r < parts.size(); ++r) {
    const Tensor& x = value(parts[r]);
    for (int j = 0; j < d; ++j) C.at(static_cast<int>(r), j) = x[j];
  }
  Node n;
  n.op = Op::ConcatRows;
  n.parents = parts;
  n.val = std::move(C);
  return push(std::move(n));
}

Tape::NodeId Tape::concat_cols(const std::vector<NodeId>& parts) {
  require(!parts.empty(), "concat_cols of nothing");
  const int rows = value(parts[0]).rows();
  int total = 0;
  for (NodeId p : parts) {
    require(value(p).rank() == 2 && value(p).rows() == rows,
            "concat_cols expects rank-2 parts with equal row count");
    total += value(p).cols();
  }
  Tensor C({rows, total});
  int at = 0;
  for (NodeId p : parts) {
    const Tensor& x = value(p);
    for (int i = 0; i < rows; ++i)
      for (int j = 0; j < x.cols(); ++j) C.at(i, at + j) = x.at(i, j);
    at += x.cols();
  }
  Node n;
  n.op = Op::ConcatCols;
  n.parents = parts;
  n.val = std::move(C);
  return push(std::move(n));
}

Tape::NodeId Tape::gather_rows(NodeId m, std::vector<int> rows) {
  const Tensor& M = value(m);
  require(M.rank() == 2, "gather_rows expects rank-2 input");
  for (int r : rows) require(r >= 0 && r < M.rows(), "gather_rows index out of range");
  Tensor C({static_cast<int>(rows.size()), M.cols()});
  for (size_t i = 0; i < rows.size(); ++i)
    for (int j = 0; j < M.cols(); ++j) C.at(static_cast<int>(i), j) = M.at(rows[i], j);
  Node n;
  n.op = Op::GatherRows;
  n.parents = {m};
  n.idx = std::move(rows);
  n.val = std::move(C);
  return push(std::move(n));
}

Tape::NodeId Tape::assemble_rows(const std::vector<NodeId>& parts,
                                 std::vector<std::vector<int>> row_lists, int n_rows) {
  require(parts.size() == row_lists.size(), "assemble_rows parts/index mismatch");
  require(!parts.empty(), "assemble_rows of nothing");
  const int d = value(parts[0]).cols();
  std::vector<char> seen(n_rows, 0);
  for (size_t p = 0; p < parts.size(); ++p) {
    const Tensor& x = value(parts[p]);
    require(x.rank() == 2 && x.cols() == d, "assemble_rows width mismatch");
    require(x.rows() == static_cast<int>(row_lists[p].size()),
            "assemble_rows row-count mismatch");
    for (int r : row_lists[p]) {
      require(r >= 0 && r < n_rows && !seen[r], "assemble_rows indices must partition rows");
      seen[r] = 1;
    }
  }
  for (char s : seen) require(s == 1, "assemble_rows indices must cover every row");
  Tensor C({n_rows, d});
  for (size_t p = 0; p < parts.size(); ++p) {
    const Tensor& x = value(parts[p]);
    for (int i = 0; i < x.rows(); ++i)
      for (int j = 0; j < d; ++j) C.at(row_lists[p][i], j) = x.at(i, j);
  }
  Node n;
  n.op = Op::AssembleRows;
  n.parents = parts;
  n.idx_lists = std::move(row_lists);
  n.val = std::move(C);
  return push(std::move(n));
}

Tape::NodeId Tape::select_row(NodeId m, int row) {
  const Tensor& M = value(m);
  require(M.rank() == 2 && row >= 0 && row < M.rows(), "select_row out of range");
  Tensor C({M.cols()});
  for (int j = 0; j < M.cols(); ++j) C[j] = M.at(row, j);
  Node n;
  n.op = Op::SelectRow;
  n.parents = {m};
  n.idx = {row};
  n.val = std::move(C);
  return push(std::move(n));
}

Tape::NodeId Tape::mean_rows(NodeId m) {
  const Tensor& M = value(m);
  require(M.rank() == 2 && M.rows() > 0, "mean_rows expects a non-empty matrix");
  Tensor C({M.cols()});
  for (int j = 0; j < M.cols(); ++j) {
    double s = 0.0;
    for (int i = 0; i < M.rows(); ++i) s += M.at(i, j);
    C[j] = s / M.rows();
  }
  Node n;
  n.op = Op::MeanRows;
  n.parents = {m};
  n.val = std::move(C);
  return push(std::move(n));
}

Tape::NodeId Tape::layer_norm(NodeId m, NodeId gamma, NodeId beta) {
  const Tensor& M = value(m);
  const Tensor& g = value(gamma);
  const Tensor& b = value(beta);
  require(M.rank() == 2 && g.rank() == 1 && b.rank() == 1 && g.dim(0) == M.cols() &&
              b.dim(0) == M.cols(),
          "layer_norm shape mismatch");
  constexpr double kEps = 1e-12;
  const int rows = M.rows(), d = M.cols();
  Tensor out({rows, d});
  Tensor saved({rows, d + 1});  // normalised rows + inverse stddev per row
  for (int i = 0; i < rows; ++i) {
    double mean = 0.0;
    for (int j = 0; j < d; ++j) mean += M.at(i, j);
    mean /= d;
    double var = 0.0;
    for (int j = 0; j < d; ++j) {
      double c = M.at(i, j) - mean;
      var += c * c;
    }
    var /= d;
    double inv_std = 1.0 / std::sqrt(var + kEps);
    for (int j = 0; j < d; ++j) {
      double xn = (M.at(i, j) - mean) * inv_std;
      saved.at(i, j) = xn;
      out.at(i, j) = g[j] * xn + b[j];
    }
    saved.at(i, d) = inv_std;
  }
  Node n;
  n.op = Op::LayerNorm;
  n.parents = {m, gamma, beta};
  n.saved = std::move(saved);
  n.val = std::move(out);
  return push(std::move(n));
}

Tape::NodeId Tape::masked_softmax(NodeId logits, const Tensor& mask) {
  const Tensor& X = value(logits);
  require(X.rank() == 2 && mask.same_shape(X), "masked_softmax shape mismatch");
  const int rows = X.rows(), cols = X.cols();
  Tensor out({rows, cols});
  for (int i = 0; i < rows; ++i) {
    double row_max = kMaskedLogit;
    for (int j = 0; j < cols; ++j) {
      if (mask.at(i, j) != 0.0) {
        double e = mask.at(i, j) * X.at(i, j);
        if (e > row_max) row_max = e;
      }
    }
    require(row_max > kMaskedLogit, "masked_softmax on an all-zero mask row");
    double sum = 0.0;
    for (int j = 0; j < cols; ++j) {
      if (mask.at(i, j) != 0.0) {
        double e = std::exp(mask.at(i, j) * X.at(i, j) - row_max);
        out.at(i, j) = e;
        sum += e;
      }
    }
    for (int j = 0; j < cols; ++j) {
      // masked positions stay exactly zero
      if (mask.at(i, j) != 0.0) out.at(i, j) /= sum;
    }
  }
  Node n;
  n.op = Op::MaskedSoftmax;
  n.parents = {logits};
  n.mask = mask;
  n.val = std::move(out);
  return push(std::move(n));
}

Tape::NodeId Tape::embed_sparse(NodeId w,
                                const std::vector<std::pair<int, double>>& entries) {
  const Tensor& W = value(w);
  require(W.rank() == 2, "embed_sparse expects a rank-2 table");
  Tensor out({W.rows()});
  for (const auto& [idx, v] : entries) {
    require(idx >= 0 && idx < W.cols(), "embed_sparse index out of range");
    for (int r = 0; r < W.rows(); ++r) out[r] += v * W.at(r, idx);
  }
  Node n;
  n.op = Op::EmbedSparse;
  n.parents = {w};
  n.entries = entries;
  n.val = std::move(out);
  return push(std::move(n));
}

Tape::NodeId Tape::bce(NodeId probability, double label) {
  const Tensor& P = value(probability);
  require(P.rank() == 1 && P.dim(0) == 1, "bce expects a scalar probability");
  require(label == 0.0 || label == 1.0, "bce label must be 0 or 1");
  double p = P[0];
  if (!(p > 0.0 && p < 1.0))
    throw NumericError("bce probability outside (0,1)");
  Tensor out({1});
  out[0] = -(label * std::log(p) + (1.0 - label) * std::log(1.0 - p));
  Node n;
  n.op = Op::Bce;
  n.parents = {probability};
  n.c = label;
  n.val = std::move(out);
  return push(std::move(n));
}

Tape::NodeId Tape::l2_norm(NodeId v) {
  const Tensor& x = value(v);
  require(x.rank() == 1, "l2_norm expects rank-1 input");
  double s = 0.0;
  for (size_t i = 0; i < x.size(); ++i) s += x[i] * x[i];
  Tensor out({1});
  out[0] = std::sqrt(s);
  Node n;
  n.op = Op::L2Norm;
  n.parents = {v};
  n.val = std::move(out);
  return push(std::move(n));
}

Tape::NodeId Tape::l1_norm(NodeId v) {
  const Tensor& x = value(v);
  require(x.rank() == 1, "l1_norm expects rank-1 input");
  double s = 0.0;
  for (size_t i = 0; i < x.size(); ++i) s += std::abs(x[i]);
  Tensor out({1});
  out[0] = s;
  Node n;
  n.op = Op::L1Norm;
  n.parents = {v};
  n.val = std::move(out);
  return push(std::move(n));
}

Tape::NodeId Tape::sum(NodeId a) {
  const Tensor& A = value(a);
  Tensor out({1});
  for (size_t i = 0; i < A.size(); ++i) out[0] += A[i];
  Node n;
  n.op = Op::Sum;
  n.parents = {a};
  n.val = std::move(out);
  return push(std::move(n));
}

void Tape::backward(NodeId loss, bool release_buffers) {
  Node& top = node(loss);
  require(top.val.rank() == 1 && top.val.dim(0) == 1, "backward needs a scalar loss");
  grad_buf(loss)[0] = 1.0;
  for (NodeId id = loss; id >= 0; --id) {
    Node& n = node(id);
    if (!n.grad_set) continue;
    backward_node(id);
    if (release_buffers && n.op != Op::Constant && n.op != Op::Param) {
      n.val = Tensor();
      n.grad = Tensor();
      n.grad_set = false;
      n.saved = Tensor();
    }
  }
}

void Tape::backward_node(NodeId id) {
  Node& n = node(id);
  const Tensor& g = n.grad;
  switch (n.op) {
    case Op::Constant:
      break;
    case Op::Param:
      for (size_t i = 0; i < g.size(); ++i) n.parameter->grad[i] += g[i];
      break;
    case Op::MatMul: {
      const Tensor& A = value(n.parents[0]);
      const Tensor& B = value(n.parents[1]);
      Tensor& dA = grad_buf(n.parents[0]);
      Tensor& dB = grad_buf(n.parents[1]);
      const int p = A.rows(), q = A.cols(), r = B.cols();
      for (int i = 0; i < p; ++i)
        for (int j = 0; j < r; ++j) {
          double gij = g.at(i, j);
          if (gij == 0.0) continue;
          for (int k = 0; k < q; ++k) {
            dA.at(i, k) += gij * B.at(k, j);
            dB.at(k, j) += gij * A.at(i, k);
          }
        }
      break;
    }
    case Op::MatMulT: {
      const Tensor& A = value(n.parents[0]);
      const Tensor& B = value(n.parents[1]);
      Tensor& dA = grad_buf(n.parents[0]);
      Tensor& dB = grad_buf(n.parents[1]);
      const int p = A.rows(), q = A.cols(), r = B.rows();
      for (int i = 0; i < p; ++i)
        for (int j = 0; j < r; ++j) {
          double gij = g.at(i, j);
          if (gij == 0.0) continue;
          for (int k = 0; k < q; ++k) {
            dA.at(i, k) += gij * B.at(j, k);
            dB.at(j, k) += gij * A.at(i, k);
          }
        }
      break;
    }
    case Op::MatVec: {
      const Tensor& M = value(n.parents[0]);
      const Tensor& x = value(n.parents[1]);
      Tensor& dM = grad_buf(n.parents[0]);
      Tensor& dx = grad_buf(n.parents[1]);
      for (int i = 0; i < M.rows(); ++i) {
        double gi = g[i];
        if (gi == 0.0) continue;
        for (int k = 0; k < M.cols(); ++k) {
          dM.at(i, k) += gi * x[k];
          dx[k] += gi * M.at(i, k);
        }
      }
      break;
    }
    case Op::Add: {
      Tensor& dA = grad_buf(n.parents[0]);
      Tensor& dB = grad_buf(n.parents[1]);
      for (size_t i = 0; i < g.size(); ++i) {
        dA[i] += g[i];
        dB[i] += g[i];
      }
      break;
    }
    case Op::Sub: {
      Tensor& dA = grad_buf(n.parents[0]);
      Tensor& dB = grad_buf(n.parents[1]);
      for (size_t i = 0; i < g.size(); ++i) {
        dA[i] += g[i];
        dB[i] -= g[i];
      }
      break;
    }
    case Op::Hadamard: {
      const Tensor& A = value(n.parents[0]);
      const Tensor& B = value(n.parents[1]);
      Tensor& dA = grad_buf(n.parents[0]);
      Tensor& dB = grad_buf(n.parents[1]);
      for (size_t i = 0; i < g.size(); ++i) {
        dA[i] += g[i] * B[i];
        dB[i] += g[i] * A[i];
      }
      break;
    }
    case Op::Scale: {
      Tensor& dA = grad_buf(n.parents[0]);
      for (size_t i = 0; i < g.size(); ++i) dA[i] += g[i] * n.c;
      break;
    }
    case Op::AddBias: {
      Tensor& dM = grad_buf(n.parents[0]);
      Tensor& db = grad_buf(n.parents[1]);
      const int rows = g.rows(), cols = g.cols();
      for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) {
          dM.at(i, j) += g.at(i, j);
          db[j] += g.at(i, j);
        }
      break;
    }
    case Op::Relu: {
      Tensor& dA = grad_buf(n.parents[0]);
      for (size_t i = 0; i < g.size(); ++i)
        if (n.saved[i] > 0.0) dA[i] += g[i];
      break;
    }
    case Op::Sigmoid: {
      Tensor& dA = grad_buf(n.parents[0]);
      for (size_t i = 0; i < g.size(); ++i) {
        double p = n.val[i];
        dA[i] += g[i] * p * (1.0 - p);
      }
      break;
    }
    case Op::ConcatVec: {
      int at = 0;
      for (NodeId p : n.parents) {
        Tensor& dp = grad_buf(p);
        for (int i = 0; i < dp.dim(0); ++i) dp[i] += g[at + i];
        at += dp.dim(0);
      }
      break;
    }
    case Op::ConcatRows: {
      for (size_t r = 0; r < n.parents.size(); ++r) {
        Tensor& dp = grad_buf(n.parents[r]);
        for (int j = 0; j < dp.dim(0); ++j) dp[j] += g.at(static_cast<int>(r), j);
      }
      break;
    }
    case Op::ConcatCols: {
      int at = 0;
      for (NodeId p : n.parents) {
        Tensor& dp = grad_buf(p);
        for (int i = 0; i < dp.rows(); ++i)
          for (int j = 0; j < dp.cols(); ++j) dp.at(i, j) += g.at(i, at + j);
        at += dp.cols();
      }
      break;
    }
    case Op::GatherRows: {
      Tensor& dM = grad_buf(n.parents[0]);
      for (size_t i = 0; i < n.idx.size(); ++i)
        for (int j = 0; j < g.cols(); ++j)
          dM.at(n.idx[i], j) += g.at(static_cast<int>(i), j);
      break;
    }
    case Op::AssembleRows: {
      for (size_t p = 0; p < n.parents.size(); ++p) {
        Tensor& dp = grad_buf(n.parents[p]);
        for (int i = 0; i < dp.rows(); ++i)
          for (int j = 0; j < dp.cols(); ++j) dp.at(i, j) += g.at(n.idx_lists[p][i], j);
      }
      break;
    }
    case Op::SelectRow: {
      Tensor& dM = grad_buf(n.parents[0]);
      for (int j = 0; j < dM.cols(); ++j) dM.at(n.idx[0], j) += g[j];
      break;
    }
    case Op::MeanRows: {
      Tensor& dM = grad_buf(n.parents[0]);
      const double inv = 1.0 / dM.rows();
      for (int i = 0; i < dM.rows(); ++i)
        for (int j = 0; j < dM.cols(); ++j) dM.at(i, j) += g[j] * inv;
      break;
    }
    case Op::LayerNorm: {
      const Tensor& gamma = value(n.parents[1]);
      Tensor& dM = grad_buf(n.parents[0]);
      Tensor& dGamma = grad_buf(n.parents[1]);
      Tensor& dBeta = grad_buf(n.parents[2]);
      const int rows = g.rows(), d = g.cols();
      for (int i = 0; i < rows; ++i) {
        double inv_std = n.saved.at(i, d);
        double mean_q = 0.0, mean_qx = 0.0;
        for (int j = 0; j < d; ++j) {
          double q = gamma[j] * g.at(i, j);
          mean_q += q;
          mean_qx += q * n.saved.at(i, j);
        }
        mean_q /= d;
        mean_qx /= d;
        for (int j = 0; j < d; ++j) {
          double xn = n.saved.at(i, j);
          double q = gamma[j] * g.at(i, j);
          dM.at(i, j) += (q - mean_q - xn * mean_qx) * inv_std;
          dGamma[j] += g.at(i, j) * xn;
          dBeta[j] += g.at(i, j);
        }
      }
      break;
    }
    case Op::MaskedSoftmax: {
      Tensor& dX = grad_buf(n.parents[0]);
      const int rows = g.rows(), cols = g.cols();
      for (int i = 0; i < rows; ++i) {
        double dot = 0.0;
        for (int j = 0; j < cols; ++j) dot += n.val.at(i, j) * g.at(i, j);
        for (int j = 0; j < cols; ++j) {
          double m = n.mask.at(i, j);
          if (m == 0.0) continue;
          dX.at(i, j) += m * n.val.at(i, j) * (g.at(i, j) - dot);
        }
      }
      break;
    }
    case Op::EmbedSparse: {
      Tensor& dW = grad_buf(n.parents[0]);
      for (const auto& [idx, v] : n.entries)
        for (int r = 0; r < dW.rows(); ++r) dW.at(r, idx) += v * g[r];
      break;
    }
    case Op::Bce: {
      const Tensor& P = value(n.parents[0]);
      Tensor& dP = grad_buf(n.parents[0]);
      double p = P[0], y = n.c;
      dP[0] += g[0] * (p - y) / (p * (1.0 - p));
      break;
    }
    case Op::L2Norm: {
      const Tensor& x = value(n.parents[0]);
      Tensor& dx = grad_buf(n.parents[0]);
      double norm = n.val[0];
      if (norm > 0.0)
        for (size_t i = 0; i < x.size(); ++i) dx[i] += g[0] * x[i] / norm;
      break;
    }
    case Op::L1Norm: {
      const Tensor& x = value(n.parents[0]);
      Tensor& dx = grad_buf(n.parents[0]);
      for (size_t i = 0; i < x.size(); ++i) {
        if (x[i] > 0.0) dx[i] += g[0];
        if (x[i] < 0.0) dx[i] -= g[0];
      }
      break;
    }
    case Op::Sum: {
      Tensor& dx = grad_buf(n.parents[0]);
      for (size_t i = 0; i < dx.size(); ++i) dx[i] += g[0];
      break;
    }
  }
}

}  // namespace hinctr
