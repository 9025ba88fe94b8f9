#pragma once
// Reverse-mode autodiff tape. Nodes are recorded in execution order, which
// is already a topological order, so the backward pass is one reverse sweep
// that visits every node exactly once. A tape is single-threaded; run one
// tape per instance and merge parameter gradients at a single point.
//
// Shape contracts (no broadcasting):
//   matmul      (p,q)·(q,r) -> (p,r)
//   matmul_t    (p,q)·(r,q) -> (p,r)         a · b^T
//   matvec      (p,q)·(q)   -> (p)
//   add/sub/hadamard  identical shapes
//   scale       any shape, scalar constant
//   add_bias    (n,d) + (d) -> (n,d)         bias added to every row
//   concat_vec  rank-1 parts -> rank-1
//   concat_rows rank-1 parts of width d -> (n,d)
//   concat_cols (n,d_i) parts -> (n, sum d_i)
//   gather_rows (n,d), k indices -> (k,d)
//   assemble_rows parts (k_i,d) + disjoint index lists covering 0..n-1 -> (n,d)
//   select_row  (n,d), i -> (d)
//   mean_rows   (n,d) -> (d)
//   layer_norm  (n,d), gamma (d), beta (d) -> (n,d), row-wise
//   masked_softmax (n,m) with mask (n,m): out_ij = exp(M_ij*x_ij)
//       normalised over the j with M_ij != 0; exact zeros elsewhere.
//   embed_sparse  W (d,dim) with sparse entries -> (d)
//   bce         probability (1), label in {0,1} -> (1)
//   l2_norm / l1_norm  rank-1 -> (1)

#include <functional>
#include <memory>
#include <vector>

#include "hinctr/tensor.hpp"

namespace hinctr {

class Tape {
 public:
  using NodeId = int;

  NodeId constant(Tensor v);
  // Leaf backed by a Parameter; backward accumulates into p->grad.
  NodeId param(Parameter* p);

  NodeId matmul(NodeId a, NodeId b);
  NodeId matmul_t(NodeId a, NodeId b);
  NodeId matvec(NodeId m, NodeId v);
  NodeId add(NodeId a, NodeId b);
  NodeId sub(NodeId a, NodeId b);
  NodeId hadamard(NodeId a, NodeId b);
  NodeId scale(NodeId a, double c);
  NodeId add_bias(NodeId m, NodeId bias);
  NodeId relu(NodeId a);
  NodeId sigmoid(NodeId a);
  NodeId concat_vec(const std::vector<NodeId>& parts);
  NodeId concat_rows(const std::vector<NodeId>& parts);
  NodeId concat_cols(const std::vector<NodeId>& parts);
  NodeId gather_rows(NodeId m, std::vector<int> rows);
  NodeId assemble_rows(const std::vector<NodeId>& parts,
                       std::vector<std::vector<int>> row_lists, int n);
  NodeId select_row(NodeId m, int row);
  NodeId mean_rows(NodeId m);
  NodeId layer_norm(NodeId m, NodeId gamma, NodeId beta);
  NodeId masked_softmax(NodeId logits, const Tensor& mask);
  NodeId embed_sparse(NodeId w, const std::vector<std::pair<int, double>>& entries);
  NodeId bce(NodeId probability, double label);
  NodeId l2_norm(NodeId v);
  NodeId l1_norm(NodeId v);
  NodeId sum(NodeId a);  // all elements -> (1)

  const Tensor& value(NodeId id) const { return nodes_.at(id).val; }
  // Gradient of the last backward() w.r.t. a node. Only meaningful when
  // backward ran with release_buffers = false.
  const Tensor& grad(NodeId id) const;

  // Seeds d(loss)/d(loss) = 1 and sweeps the tape in reverse, accumulating
  // into every Parameter::grad reachable from `loss`. With release_buffers
  // the value and gradient buffers of processed intermediates are freed.
  void backward(NodeId loss, bool release_buffers = true);

  int node_count() const { return static_cast<int>(nodes_.size()); }

 private:
  enum class Op {
    Constant, Param, MatMul, MatMulT, MatVec, Add, Sub, Hadamard, Scale,
    AddBias, Relu, Sigmoid, ConcatVec, ConcatRows, ConcatCols, GatherRows,
    AssembleRows, SelectRow, MeanRows, LayerNorm, MaskedSoftmax, EmbedSparse,
    Bce, L2Norm, L1Norm, Sum,
  };

  struct Node {
    Op op;
    std::vector<NodeId> parents;
    Tensor val;
    Tensor grad;
    bool grad_set = false;

    Parameter* parameter = nullptr;          // Param
    double c = 0.0;                          // Scale, Bce label
    std::vector<int> idx;                    // GatherRows / SelectRow
    std::vector<std::vector<int>> idx_lists; // AssembleRows
    Tensor mask;                             // MaskedSoftmax
    std::vector<std::pair<int, double>> entries;  // EmbedSparse
    Tensor saved;                            // op-specific forward cache
  };

  NodeId push(Node n);
  Node& node(NodeId id) { return nodes_.at(id); }
  Tensor& grad_buf(NodeId id);

  void backward_node(NodeId id);

  std::vector<Node> nodes_;
};

}  // namespace hinctr
