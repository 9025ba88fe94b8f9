#include "hinctr/model.hpp"

#include <cmath>

namespace hinctr {

const char* readout_mode_name(ReadoutMode m) {
  return m == ReadoutMode::TargetsInput ? "targets-input" : "targets-final";
}

ReadoutMode readout_mode_from_name(const std::string& name) {
  if (name == "targets-input") return ReadoutMode::TargetsInput;
  if (name == "targets-final") return ReadoutMode::TargetsFinal;
  throw DataError("unknown readout mode '" + name + "'");
}

std::vector<MaskKind> default_head_kinds(int heads) {
  if (heads % 4 != 0) throw DataError("head count must be divisible by 4");
  std::vector<MaskKind> kinds(heads);
  const MaskKind order[4] = {MaskKind::Induced, MaskKind::Similarity,
                             MaskKind::Cross, MaskKind::Complete};
  const int per = heads / 4;
  for (int h = 0; h < heads; ++h) kinds[h] = order[h / per];
  return kinds;
}

std::vector<MaskKind> reassign_heads(const std::vector<MaskKind>& base,
                                     const std::vector<MaskKind>& kept) {
  if (kept.empty()) throw DataError("mask subset must not be empty");
  auto is_kept = [&](MaskKind k) {
    for (MaskKind m : kept)
      if (m == k) return true;
    return false;
  };
  std::vector<MaskKind> out = base;
  size_t next = 0;
  for (auto& k : out) {
    if (!is_kept(k)) {
      k = kept[next % kept.size()];
      ++next;
    }
  }
  return out;
}

void ModelConfig::validate() const {
  if (d < 1 || layers < 1 || d_ff < 1 || d_embed < 1 || mlp_hidden < 1)
    throw DataError("model dimensions must be >= 1");
  if (heads < 4 || heads % 4 != 0)
    throw DataError("head count must be a positive multiple of 4");
  if (d % heads != 0) throw DataError("hidden size must be divisible by head count");
  if (context_dim < 0) throw DataError("context width must be >= 0");
  if (!head_kinds.empty() && static_cast<int>(head_kinds.size()) != heads)
    throw DataError("head_kinds size must equal head count");
  if (user_type < 0 || item_type < 0 || user_type == item_type)
    throw DataError("target types must be two distinct type ids");
}

namespace {

double glorot_bound(int fan_in, int fan_out) {
  return std::sqrt(6.0 / (fan_in + fan_out));
}

}  // namespace

ModelParams::ModelParams(const FeatureSchema& schema, FeaturePartition partition,
                         ModelConfig cfg, uint64_t init_seed) {
  if (cfg.head_kinds.empty()) cfg.head_kinds = default_head_kinds(cfg.heads);
  cfg.validate();
  if (cfg.user_type >= schema.type_count() || cfg.item_type >= schema.type_count())
    throw DataError("target type id outside schema");
  cfg_ = cfg;
  partition_ = std::move(partition);
  schema_fp_ = schema.fingerprint();
  type_count_ = schema.type_count();
  const int T = type_count_, L = cfg.layers, H = cfg.heads;
  const int d = cfg.d, dh = cfg.head_dim();

  input_widths_.assign(T, 0);
  for (int t = 0; t < T; ++t)
    input_widths_[t] =
        static_cast<int>(partition_.node_input_groups.at(t).size()) * cfg.d_embed;

  auto add = [&](const std::string& name, std::vector<int> shape) {
    params_.emplace_back(name, Tensor(std::move(shape)));
    return static_cast<int>(params_.size()) - 1;
  };

  emb_idx_.assign(T, {});
  for (int t = 0; t < T; ++t) {
    emb_idx_[t].assign(schema.group_count(t), -1);
    for (int g : partition_.node_input_groups[t])
      emb_idx_[t][g] = add("emb/" + schema.type_name(t) + "/" + schema.group(t, g).name,
                           {cfg.d_embed, schema.group(t, g).dim});
  }
  input_w_idx_.resize(T);
  input_b_idx_.resize(T);
  for (int t = 0; t < T; ++t) {
    input_w_idx_[t] = add("input_w/" + schema.type_name(t), {d, input_widths_[t]});
    input_b_idx_[t] = add("input_b/" + schema.type_name(t), {d});
  }
  qkv_base_ = static_cast<int>(params_.size());
  for (int l = 0; l < L; ++l)
    for (int h = 0; h < H; ++h)
      for (int t = 0; t < T; ++t) {
        std::string tag = "l" + std::to_string(l) + "/h" + std::to_string(h) + "/" +
                          schema.type_name(t);
        add("wq/" + tag, {dh, d});
        add("wk/" + tag, {dh, d});
        add("wv/" + tag, {dh, d});
      }
  wo_base_ = static_cast<int>(params_.size());
  const int wo_per_layer = cfg.shared_output_proj ? 1 : T;
  for (int l = 0; l < L; ++l)
    for (int t = 0; t < wo_per_layer; ++t)
      add("wo/l" + std::to_string(l) +
              (cfg.shared_output_proj ? std::string("/shared") : "/" + schema.type_name(t)),
          {d, d});
  ffn_base_ = static_cast<int>(params_.size());
  for (int l = 0; l < L; ++l) {
    std::string tag = "/l" + std::to_string(l);
    add("ffn_w1" + tag, {cfg.d_ff, d});
    add("ffn_b1" + tag, {cfg.d_ff});
    add("ffn_w2" + tag, {d, cfg.d_ff});
    add("ffn_b2" + tag, {d});
    add("ln1_gamma" + tag, {d});
    add("ln1_beta" + tag, {d});
    add("ln2_gamma" + tag, {d});
    add("ln2_beta" + tag, {d});
  }
  mlp_base_ = static_cast<int>(params_.size());
  add("mlp_w1", {cfg.mlp_hidden, readout_width()});
  add("mlp_b1", {cfg.mlp_hidden});
  add("mlp_w2", {1, cfg.mlp_hidden});
  add("mlp_b2", {1});

  // Glorot-uniform weights, zero biases, identity layer norm. Iterating in
  // registry order keeps initialisation reproducible from the seed alone.
  Rng rng(init_seed);
  for (auto& p : params_) {
    if (p.name.rfind("ln1_gamma", 0) == 0 || p.name.rfind("ln2_gamma", 0) == 0) {
      p.value.fill(1.0);
    } else if (p.value.rank() == 1) {
      p.value.fill(0.0);
    } else {
      double b = glorot_bound(p.value.cols(), p.value.rows());
      p.value.fill_uniform(rng, -b, b);
    }
  }
}

bool ModelParams::has_embedding(int type, int group) const {
  return emb_idx_.at(type).at(group) >= 0;
}

Parameter& ModelParams::embedding(int type, int group) {
  int idx = emb_idx_.at(type).at(group);
  if (idx < 0) throw DataError("feature group not routed to node input");
  return at(idx);
}

Parameter& ModelParams::input_w(int type) { return at(input_w_idx_.at(type)); }
Parameter& ModelParams::input_b(int type) { return at(input_b_idx_.at(type)); }

Parameter& ModelParams::wq(int layer, int head, int type) {
  return at(qkv_base_ + ((layer * cfg_.heads + head) * type_count_ + type) * 3);
}
Parameter& ModelParams::wk(int layer, int head, int type) {
  return at(qkv_base_ + ((layer * cfg_.heads + head) * type_count_ + type) * 3 + 1);
}
Parameter& ModelParams::wv(int layer, int head, int type) {
  return at(qkv_base_ + ((layer * cfg_.heads + head) * type_count_ + type) * 3 + 2);
}
Parameter& ModelParams::wo(int layer, int type) {
  if (cfg_.shared_output_proj) return at(wo_base_ + layer);
  return at(wo_base_ + layer * type_count_ + type);
}

Parameter& ModelParams::ffn_w1(int layer) { return at(ffn_base_ + layer * 8); }
Parameter& ModelParams::ffn_b1(int layer) { return at(ffn_base_ + layer * 8 + 1); }
Parameter& ModelParams::ffn_w2(int layer) { return at(ffn_base_ + layer * 8 + 2); }
Parameter& ModelParams::ffn_b2(int layer) { return at(ffn_base_ + layer * 8 + 3); }
Parameter& ModelParams::ln1_gamma(int layer) { return at(ffn_base_ + layer * 8 + 4); }
Parameter& ModelParams::ln1_beta(int layer) { return at(ffn_base_ + layer * 8 + 5); }
Parameter& ModelParams::ln2_gamma(int layer) { return at(ffn_base_ + layer * 8 + 6); }
Parameter& ModelParams::ln2_beta(int layer) { return at(ffn_base_ + layer * 8 + 7); }
Parameter& ModelParams::mlp_w1() { return at(mlp_base_); }
Parameter& ModelParams::mlp_b1() { return at(mlp_base_ + 1); }
Parameter& ModelParams::mlp_w2() { return at(mlp_base_ + 2); }
Parameter& ModelParams::mlp_b2() { return at(mlp_base_ + 3); }

int ModelParams::input_width(int type) const { return input_widths_.at(type); }

int ModelParams::readout_width() const {
  if (cfg_.readout == ReadoutMode::TargetsFinal) return 3 * cfg_.d + cfg_.context_dim;
  return cfg_.d + input_widths_.at(cfg_.user_type) + input_widths_.at(cfg_.item_type) +
         cfg_.context_dim;
}

std::vector<Parameter*> ModelParams::all() {
  std::vector<Parameter*> out;
  out.reserve(params_.size());
  for (auto& p : params_) out.push_back(&p);
  return out;
}

void ModelParams::zero_grads() {
  for (auto& p : params_) p.zero_grad();
}

size_t ModelParams::scalar_count() const {
  size_t n = 0;
  for (const auto& p : params_) n += p.value.size();
  return n;
}

Tape::NodeId embed_node_features(Tape& tape, ModelParams& params,
                                 const SparseFeatureVector& fv, int type) {
  const auto& groups = params.partition().node_input_groups.at(type);
  if (groups.empty()) return tape.constant(Tensor({0}));
  std::vector<Tape::NodeId> parts;
  parts.reserve(groups.size());
  for (int g : groups) {
    Tape::NodeId w = tape.param(&params.embedding(type, g));
    parts.push_back(tape.embed_sparse(w, fv.groups.at(g)));
  }
  return parts.size() == 1 ? parts[0] : tape.concat_vec(parts);
}

Tape::NodeId type_transform(Tape& tape, ModelParams& params, Tape::NodeId x,
                            int type) {
  Tape::NodeId w = tape.param(&params.input_w(type));
  Tape::NodeId b = tape.param(&params.input_b(type));
  return tape.add(tape.matvec(w, x), b);
}

namespace {

Tensor mask_tensor(const Mask& m) {
  Tensor t({m.n, m.n});
  for (size_t i = 0; i < m.w.size(); ++i) t[i] = m.w[i];
  return t;
}

}  // namespace

Tape::NodeId encoder_layer(Tape& tape, ModelParams& params, int layer,
                           Tape::NodeId h_in, const MaskSet& masks,
                           const std::vector<int>& types) {
  const ModelConfig& cfg = params.config();
  const int n = tape.value(h_in).rows();
  if (masks.n != n || static_cast<int>(types.size()) != n)
    throw NumericError("encoder_layer: mask/type dimension mismatch at layer " +
                       std::to_string(layer));

  // Group rows by node type once; per-type projections then run as one
  // matmul per type instead of one per node.
  std::vector<std::vector<int>> rows_of_type;
  std::vector<int> present;
  {
    int max_t = 0;
    for (int t : types) max_t = std::max(max_t, t);
    rows_of_type.assign(max_t + 1, {});
    for (int i = 0; i < n; ++i) rows_of_type[types[i]].push_back(i);
    for (int t = 0; t <= max_t; ++t)
      if (!rows_of_type[t].empty()) present.push_back(t);
  }

  std::vector<Tape::NodeId> gathered(present.size());
  for (size_t pi = 0; pi < present.size(); ++pi)
    gathered[pi] = tape.gather_rows(h_in, rows_of_type[present[pi]]);

  auto project = [&](Parameter& (ModelParams::*proj)(int, int, int), int head) {
    std::vector<Tape::NodeId> parts(present.size());
    std::vector<std::vector<int>> lists(present.size());
    for (size_t pi = 0; pi < present.size(); ++pi) {
      Tape::NodeId w = tape.param(&(params.*proj)(layer, head, present[pi]));
      parts[pi] = tape.matmul_t(gathered[pi], w);
      lists[pi] = rows_of_type[present[pi]];
    }
    if (parts.size() == 1 && lists[0].size() == static_cast<size_t>(n)) {
      bool identity = true;
      for (int i = 0; i < n; ++i) identity &= lists[0][i] == i;
      if (identity) return parts[0];
    }
    return tape.assemble_rows(parts, lists, n);
  };

  Tensor mask_t[4] = {mask_tensor(masks.induced), mask_tensor(masks.similarity),
                      mask_tensor(masks.cross), mask_tensor(masks.complete)};
  const double inv_sqrt_dh = 1.0 / std::sqrt(static_cast<double>(cfg.head_dim()));

  std::vector<Tape::NodeId> head_out(cfg.heads);
  for (int h = 0; h < cfg.heads; ++h) {
    Tape::NodeId q = project(&ModelParams::wq, h);
    Tape::NodeId k = project(&ModelParams::wk, h);
    Tape::NodeId v = project(&ModelParams::wv, h);
    Tape::NodeId scores = tape.scale(tape.matmul_t(q, k), inv_sqrt_dh);
    const Tensor& m = mask_t[static_cast<int>(cfg.head_kinds[h])];
    Tape::NodeId attn = tape.masked_softmax(scores, m);
    head_out[h] = tape.matmul(attn, v);
  }
  Tape::NodeId concat = tape.concat_cols(head_out);

  Tape::NodeId attn_out;
  if (cfg.shared_output_proj) {
    attn_out = tape.matmul_t(concat, tape.param(&params.wo(layer, 0)));
  } else {
    std::vector<Tape::NodeId> parts(present.size());
    std::vector<std::vector<int>> lists(present.size());
    for (size_t pi = 0; pi < present.size(); ++pi) {
      Tape::NodeId w = tape.param(&params.wo(layer, present[pi]));
      parts[pi] = tape.matmul_t(tape.gather_rows(concat, rows_of_type[present[pi]]), w);
      lists[pi] = rows_of_type[present[pi]];
    }
    attn_out = tape.assemble_rows(parts, lists, n);
  }

  Tape::NodeId x1 = tape.layer_norm(tape.add(h_in, attn_out),
                                    tape.param(&params.ln1_gamma(layer)),
                                    tape.param(&params.ln1_beta(layer)));
  Tape::NodeId ff = tape.add_bias(tape.matmul_t(x1, tape.param(&params.ffn_w1(layer))),
                                  tape.param(&params.ffn_b1(layer)));
  ff = tape.relu(ff);
  ff = tape.add_bias(tape.matmul_t(ff, tape.param(&params.ffn_w2(layer))),
                     tape.param(&params.ffn_b2(layer)));
  return tape.layer_norm(tape.add(x1, ff), tape.param(&params.ln2_gamma(layer)),
                         tape.param(&params.ln2_beta(layer)));
}

ForwardNodes model_forward(Tape& tape, ModelParams& params, const HinGraph& g,
                           const Neighbourhood& nb, const MaskSet& masks,
                           const std::vector<double>& context) {
  const ModelConfig& cfg = params.config();
  const int n = nb.size();
  if (masks.n != n) throw NumericError("mask dimension does not match neighbourhood");
  if (static_cast<int>(context.size()) != cfg.context_dim)
    throw NumericError("context width " + std::to_string(context.size()) +
                       " does not match configured " + std::to_string(cfg.context_dim));
  if (g.type_of(nb.u()) != cfg.user_type || g.type_of(nb.v()) != cfg.item_type)
    throw DataError("target pair types do not match the configured target types");

  std::vector<int> types(n);
  for (int i = 0; i < n; ++i) types[i] = g.type_of(nb.nodes[i]);

  std::vector<Tape::NodeId> x(n), h(n);
  for (int i = 0; i < n; ++i) {
    x[i] = embed_node_features(tape, params, g.features(nb.nodes[i]), types[i]);
    h[i] = type_transform(tape, params, x[i], types[i]);
  }
  Tape::NodeId hidden = tape.concat_rows(h);
  for (int l = 0; l < cfg.layers; ++l)
    hidden = encoder_layer(tape, params, l, hidden, masks, types);

  ForwardNodes out;
  out.z_final = hidden;
  out.g_uv = tape.mean_rows(hidden);

  std::vector<Tape::NodeId> parts{out.g_uv};
  if (cfg.readout == ReadoutMode::TargetsInput) {
    parts.push_back(x[0]);
    parts.push_back(x[1]);
  } else {
    parts.push_back(tape.select_row(hidden, 0));
    parts.push_back(tape.select_row(hidden, 1));
  }
  if (cfg.context_dim > 0) {
    Tensor c({cfg.context_dim});
    for (int i = 0; i < cfg.context_dim; ++i) c[i] = context[i];
    parts.push_back(tape.constant(std::move(c)));
  }
  out.z_o = tape.concat_vec(parts);

  Tape::NodeId h1 = tape.relu(tape.add(tape.matvec(tape.param(&params.mlp_w1()), out.z_o),
                                       tape.param(&params.mlp_b1())));
  Tape::NodeId logit = tape.add(tape.matvec(tape.param(&params.mlp_w2()), h1),
                                tape.param(&params.mlp_b2()));
  out.y_hat = tape.sigmoid(logit);
  return out;
}

ForwardOutput run_forward(ModelParams& params, const HinGraph& g,
                          const Neighbourhood& nb, const MaskSet& masks,
                          const std::vector<double>& context) {
  Tape tape;
  ForwardNodes nodes = model_forward(tape, params, g, nb, masks, context);
  ForwardOutput out;
  out.z = tape.value(nodes.z_final);
  out.g_uv = tape.value(nodes.g_uv);
  out.z_o = tape.value(nodes.z_o);
  out.y_hat = tape.value(nodes.y_hat)[0];
  return out;
}

double predict_score(ModelParams& params, const HinGraph& g, const Neighbourhood& nb,
                     const MaskSet& masks, const std::vector<double>& context) {
  return run_forward(params, g, nb, masks, context).y_hat;
}

}  // namespace hinctr
