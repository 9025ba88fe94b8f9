#pragma once
// The graph-masked transformer. Sparse feature groups are embedded per
// (type, group), mapped into a shared d-dimensional space by a per-type
// affine transform, then run through L encoder layers whose attention heads
// are split into four groups, one per interaction-mask kind. A mean-pooling
// readout plus the two target embeddings and the context vector feed a
// small MLP with a sigmoid head.

#include <array>
#include <cstdint>
#include <vector>

#include "hinctr/masks.hpp"
#include "hinctr/tape.hpp"

namespace hinctr {

enum class ReadoutMode : uint8_t { TargetsInput, TargetsFinal };

const char* readout_mode_name(ReadoutMode m);
ReadoutMode readout_mode_from_name(const std::string&);

// Default allocation: four equal head groups in mask order
// (induced, similarity, cross, complete).
std::vector<MaskKind> default_head_kinds(int heads);

// Ablation reassignment: heads whose kind is excluded cycle round-robin
// through the kept kinds; heads already on a kept kind are untouched, so
// keeping all four kinds reproduces the base allocation exactly.
std::vector<MaskKind> reassign_heads(const std::vector<MaskKind>& base,
                                     const std::vector<MaskKind>& kept);

struct ModelConfig {
  int d = 32;        // hidden size, divisible by heads
  int heads = 8;     // divisible by 4
  int layers = 2;
  int d_ff = 64;
  int d_embed = 8;   // per-group embedding width
  int mlp_hidden = 32;
  int context_dim = 0;
  bool shared_output_proj = false;  // one W^O for all types instead of per type
  ReadoutMode readout = ReadoutMode::TargetsInput;
  std::vector<MaskKind> head_kinds;  // size == heads; empty -> default split
  int user_type = 0;
  int item_type = 1;

  int head_dim() const { return d / heads; }
  void validate() const;
};

// All trainable weights, allocated once and addressed by stable pointers.
// The registry order is fixed and doubles as the checkpoint blob order.
class ModelParams {
 public:
  ModelParams() = default;
  ModelParams(const FeatureSchema& schema, FeaturePartition partition,
              ModelConfig cfg, uint64_t init_seed);

  const ModelConfig& config() const { return cfg_; }
  const FeaturePartition& partition() const { return partition_; }
  uint64_t schema_fingerprint() const { return schema_fp_; }

  bool has_embedding(int type, int group) const;
  Parameter& embedding(int type, int group);
  Parameter& input_w(int type);
  Parameter& input_b(int type);
  Parameter& wq(int layer, int head, int type);
  Parameter& wk(int layer, int head, int type);
  Parameter& wv(int layer, int head, int type);
  Parameter& wo(int layer, int type);  // type ignored when shared_output_proj
  Parameter& ffn_w1(int layer);
  Parameter& ffn_b1(int layer);
  Parameter& ffn_w2(int layer);
  Parameter& ffn_b2(int layer);
  Parameter& ln1_gamma(int layer);
  Parameter& ln1_beta(int layer);
  Parameter& ln2_gamma(int layer);
  Parameter& ln2_beta(int layer);
  Parameter& mlp_w1();
  Parameter& mlp_b1();
  Parameter& mlp_w2();
  Parameter& mlp_b2();

  int input_width(int type) const;  // routed group count * d_embed
  int readout_width() const;

  std::vector<Parameter*> all();  // registry order
  void zero_grads();
  size_t scalar_count() const;

 private:
  friend class Checkpoint;
  int type_count_ = 0;
  ModelConfig cfg_;
  FeaturePartition partition_;
  uint64_t schema_fp_ = 0;
  std::vector<Parameter> params_;
  std::vector<std::vector<int>> emb_idx_;  // [type][group], -1 when not routed
  std::vector<int> input_w_idx_, input_b_idx_;
  int qkv_base_ = 0, wo_base_ = 0, ffn_base_ = 0, mlp_base_ = 0;
  std::vector<int> input_widths_;

  Parameter& at(int idx) { return params_.at(idx); }
};

// Handles into a tape for one forward pass.
struct ForwardNodes {
  Tape::NodeId y_hat = -1;   // (1)
  Tape::NodeId g_uv = -1;    // (d), mean-pooled neighbourhood embedding
  Tape::NodeId z_final = -1; // (n, d)
  Tape::NodeId z_o = -1;     // readout vector
};

// Extracted values of a forward pass.
struct ForwardOutput {
  Tensor z;      // (n, d)
  Tensor g_uv;   // (d)
  Tensor z_o;
  double y_hat = 0.0;
};

// Dense input embedding of one node: concatenated per-group sparse
// embeddings, restricted to the groups the partition routes to node input.
Tape::NodeId embed_node_features(Tape& tape, ModelParams& params,
                                 const SparseFeatureVector& fv, int type);

// Per-type affine map into the unified d-dimensional space.
Tape::NodeId type_transform(Tape& tape, ModelParams& params, Tape::NodeId x,
                            int type);

// One masked encoder layer (post-norm): per-type per-head Q/K/V, mask-split
// heads, per-type output projection, residual + layer norm, FFN,
// residual + layer norm.
Tape::NodeId encoder_layer(Tape& tape, ModelParams& params, int layer,
                           Tape::NodeId h_in, const MaskSet& masks,
                           const std::vector<int>& types);

ForwardNodes model_forward(Tape& tape, ModelParams& params, const HinGraph& g,
                           const Neighbourhood& nb, const MaskSet& masks,
                           const std::vector<double>& context);

ForwardOutput run_forward(ModelParams& params, const HinGraph& g,
                          const Neighbourhood& nb, const MaskSet& masks,
                          const std::vector<double>& context);

double predict_score(ModelParams& params, const HinGraph& g, const Neighbourhood& nb,
                     const MaskSet& masks, const std::vector<double>& context);

}  // namespace hinctr
