#include "hinctr/train.hpp"

#include <chrono>
#include <cmath>
#include <mutex>
#include <thread>

#include "hinctr/metrics.hpp"

namespace hinctr {

const char* optimizer_kind_name(OptimizerKind k) {
  return k == OptimizerKind::Adam ? "adam" : "sgd";
}

OptimizerKind optimizer_kind_from_name(const std::string& name) {
  if (name == "adam") return OptimizerKind::Adam;
  if (name == "sgd") return OptimizerKind::Sgd;
  throw DataError("unknown optimizer '" + name + "'");
}

const char* cr_norm_name(CrNorm n) { return n == CrNorm::L2 ? "l2" : "l1"; }

CrNorm cr_norm_from_name(const std::string& name) {
  if (name == "l2") return CrNorm::L2;
  if (name == "l1") return CrNorm::L1;
  throw DataError("unknown consistency norm '" + name + "'");
}

const char* resample_mode_name(ResampleMode m) {
  return m == ResampleMode::Fresh ? "fresh" : "frozen";
}

ResampleMode resample_mode_from_name(const std::string& name) {
  if (name == "fresh") return ResampleMode::Fresh;
  if (name == "frozen") return ResampleMode::Frozen;
  throw DataError("unknown resample mode '" + name + "'");
}

double bce_loss(double y_hat, int label) {
  if (!(y_hat > 0.0 && y_hat < 1.0)) throw NumericError("bce_loss: prediction outside (0,1)");
  if (label != 0 && label != 1) throw NumericError("bce_loss: label must be 0 or 1");
  return -(label * std::log(y_hat) + (1 - label) * std::log(1.0 - y_hat));
}

double total_loss(double bce, double cr, double gamma) {
  if (gamma < 0.0) throw NumericError("total_loss: gamma must be >= 0");
  return bce + gamma * cr;
}

double consistency_loss(const std::vector<std::vector<double>>& g_samples, CrNorm norm) {
  if (g_samples.empty()) throw NumericError("consistency_loss needs at least one sample");
  const size_t d = g_samples[0].size();
  for (const auto& g : g_samples)
    if (g.size() != d) throw NumericError("consistency_loss: inconsistent widths");
  if (d == 0) return 0.0;
  const double S = static_cast<double>(g_samples.size());
  std::vector<double> mean(d, 0.0);
  for (const auto& g : g_samples)
    for (size_t i = 0; i < d; ++i) mean[i] += g[i];
  for (auto& m : mean) m /= S;
  double loss = 0.0;
  for (const auto& g : g_samples) {
    double acc = 0.0;
    for (size_t i = 0; i < d; ++i) {
      double dev = g[i] - mean[i];
      acc += norm == CrNorm::L2 ? dev * dev : std::abs(dev);
    }
    loss += (norm == CrNorm::L2 ? std::sqrt(acc) : acc) / static_cast<double>(d);
  }
  return loss / S;
}

void TrainConfig::validate() const {
  model.validate();
  pipeline.validate();
  if (active_masks.empty()) throw DataError("active mask set must not be empty");
  // lr == 0 is allowed: a no-op optimizer is the cheapest smoke test
  if (lr < 0.0) throw DataError("learning rate must be >= 0");
  if (batch_size < 1) throw DataError("batch size must be >= 1");
  if (epochs < 0) throw DataError("epochs must be >= 0");
  if (resamples < 1) throw DataError("resamples (S) must be >= 1");
  if (gamma < 0.0) throw DataError("gamma must be >= 0");
  if (workers < 1) throw DataError("workers must be >= 1");
}

std::vector<MaskKind> effective_mask_kinds(const TrainConfig& cfg) {
  std::vector<MaskKind> kinds;
  for (MaskKind k : cfg.active_masks) {
    if (k == MaskKind::Similarity &&
        (cfg.pipeline.strategy == Strategy::S1 || cfg.pipeline.strategy == Strategy::S2))
      continue;
    bool dup = false;
    for (MaskKind seen : kinds) dup |= seen == k;
    if (!dup) kinds.push_back(k);
  }
  if (kinds.empty())
    throw DataError("no usable mask kinds left (similarity-only set under S1/S2)");
  return kinds;
}

ModelParams init_model(const FeatureSchema& schema, const TrainConfig& cfg) {
  TrainConfig c = cfg;
  c.validate();
  ModelConfig mc = c.model;
  mc.user_type = schema.type_id(c.pipeline.user_type);
  mc.item_type = schema.type_id(c.pipeline.item_type);
  mc.head_kinds = reassign_heads(default_head_kinds(mc.heads), effective_mask_kinds(c));
  FeaturePartition partition =
      partition_feature_groups(schema, c.pipeline.strategy, c.pipeline.k_ts);
  return ModelParams(schema, std::move(partition), mc, Rng::mix(c.seed, 0xF17));
}

Optimizer::Optimizer(const TrainConfig& cfg, const std::vector<Parameter*>& params)
    : kind_(cfg.optimizer), lr_(cfg.lr), b1_(cfg.beta1), b2_(cfg.beta2), eps_(cfg.adam_eps) {
  if (kind_ == OptimizerKind::Adam) {
    m_.reserve(params.size());
    v_.reserve(params.size());
    for (const Parameter* p : params) {
      m_.emplace_back(p->value.shape());
      v_.emplace_back(p->value.shape());
    }
  }
}

void Optimizer::step(const std::vector<Parameter*>& params) {
  if (kind_ == OptimizerKind::Sgd) {
    for (Parameter* p : params)
      for (size_t i = 0; i < p->value.size(); ++i) p->value[i] -= lr_ * p->grad[i];
    return;
  }
  ++t_;
  const double bc1 = 1.0 - std::pow(b1_, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(b2_, static_cast<double>(t_));
  for (size_t pi = 0; pi < params.size(); ++pi) {
    Parameter* p = params[pi];
    Tensor& m = m_[pi];
    Tensor& v = v_[pi];
    for (size_t i = 0; i < p->value.size(); ++i) {
      double g = p->grad[i];
      m[i] = b1_ * m[i] + (1.0 - b1_) * g;
      v[i] = b2_ * v[i] + (1.0 - b2_) * g * g;
      p->value[i] -= lr_ * (m[i] / bc1) / (std::sqrt(v[i] / bc2) + eps_);
    }
  }
}

// `frozen` collapses the S draws onto one neighbourhood.
uint64_t fit_resample_seed(const TrainConfig& cfg, int epoch, size_t instance_index,
                           int s) {
  uint64_t base = Rng::mix(cfg.seed, 0xA5A5);
  base = Rng::mix(base, static_cast<uint64_t>(epoch));
  base = Rng::mix(base, static_cast<uint64_t>(instance_index) + 1);
  int tag = cfg.resample_mode == ResampleMode::Frozen ? 0 : s;
  return Rng::mix(base, static_cast<uint64_t>(tag) + 7);
}

namespace {

struct InstanceLoss {
  double total = 0.0;
  double bce = 0.0;
  double cr = 0.0;
};

// Builds the per-instance loss graph on `tape` and runs backward,
// accumulating into params' grads.
InstanceLoss instance_backward(const HinGraph& g, const Instance& inst,
                               const TrainConfig& cfg, ModelParams& params,
                               int epoch, size_t instance_index, Tape& tape) {
  const int S = cfg.resamples;
  std::vector<Tape::NodeId> bces, gs;
  bces.reserve(S);
  gs.reserve(S);
  for (int s = 0; s < S; ++s) {
    uint64_t seed = fit_resample_seed(cfg, epoch, instance_index, s);
    Neighbourhood nb = sample_pair(g, inst.user, inst.item, cfg.pipeline, seed);
    MaskSet masks = masks_for(g, nb, params.partition(), cfg.pipeline, seed);
    ForwardNodes fwd = model_forward(tape, params, g, nb, masks, inst.context);
    bces.push_back(tape.bce(fwd.y_hat, inst.label));
    gs.push_back(fwd.g_uv);
  }
  Tape::NodeId bce_sum = bces[0];
  for (int s = 1; s < S; ++s) bce_sum = tape.add(bce_sum, bces[s]);
  Tape::NodeId bce_avg = S > 1 ? tape.scale(bce_sum, 1.0 / S) : bce_sum;

  InstanceLoss out;
  Tape::NodeId loss = bce_avg;
  Tape::NodeId cr = -1;
  if (cfg.cr_enabled) {
    const int d_g = tape.value(gs[0]).dim(0);
    Tape::NodeId g_sum = gs[0];
    for (int s = 1; s < S; ++s) g_sum = tape.add(g_sum, gs[s]);
    Tape::NodeId g_mean = tape.scale(g_sum, 1.0 / S);
    Tape::NodeId dev_sum = -1;
    for (int s = 0; s < S; ++s) {
      Tape::NodeId diff = tape.sub(gs[s], g_mean);
      Tape::NodeId norm =
          cfg.cr_norm == CrNorm::L2 ? tape.l2_norm(diff) : tape.l1_norm(diff);
      dev_sum = s == 0 ? norm : tape.add(dev_sum, norm);
    }
    cr = tape.scale(dev_sum, 1.0 / (S * static_cast<double>(d_g)));
    out.cr = tape.value(cr)[0];
    // gamma == 0 leaves the CR term out of the graph entirely, so training
    // is bit-identical to a run with the regulariser disabled.
    if (cfg.gamma > 0.0) loss = tape.add(bce_avg, tape.scale(cr, cfg.gamma));
  }
  out.bce = tape.value(bce_avg)[0];
  out.total = tape.value(loss)[0];
  if (!std::isfinite(out.total)) throw NumericError("non-finite loss");
  tape.backward(loss);
  return out;
}

}  // namespace

FitResult fit(const HinGraph& g, const std::vector<Instance>& train,
              const std::vector<Instance>* valid, const TrainConfig& cfg,
              ModelParams& params) {
  cfg.validate();
  if (train.empty()) throw DataError("training set is empty");
  for (const auto& inst : train)
    if (inst.label != 0 && inst.label != 1) throw DataError("label outside {0,1}");

  FitResult result;
  auto param_ptrs = params.all();
  Optimizer opt(cfg, param_ptrs);
  Rng shuffle_rng(Rng::mix(cfg.seed, 0x50FF));
  std::vector<size_t> order(train.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;

  const int workers = std::min<int>(cfg.workers, cfg.batch_size);
  std::vector<ModelParams> locals;  // per-worker parameter/grad shadows
  if (workers > 1) locals.assign(workers, params);

  bool first_step = true;
  long long step = 0;
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    auto t0 = std::chrono::steady_clock::now();
    shuffle_rng.shuffle(order);
    double ep_loss = 0.0, ep_bce = 0.0, ep_cr = 0.0;
    size_t seen = 0;

    for (size_t begin = 0; begin < order.size(); begin += cfg.batch_size) {
      const size_t end = std::min(order.size(), begin + cfg.batch_size);
      const size_t m = end - begin;
      params.zero_grads();
      std::vector<InstanceLoss> losses(m);

      if (workers <= 1) {
        for (size_t k = 0; k < m; ++k) {
          Tape tape;
          losses[k] = instance_backward(g, train[order[begin + k]], cfg, params, epoch,
                                        order[begin + k], tape);
        }
      } else {
        // Static round-robin split; each worker accumulates into its own
        // shadow gradients, merged below in worker order so the result does
        // not depend on thread timing.
        for (auto& lp : locals) {
          auto dst = lp.all();
          for (size_t pi = 0; pi < param_ptrs.size(); ++pi) {
            dst[pi]->value = param_ptrs[pi]->value;
            dst[pi]->zero_grad();
          }
        }
        std::vector<std::thread> pool;
        std::exception_ptr error;
        std::mutex error_mu;
        for (int w = 0; w < workers; ++w) {
          pool.emplace_back([&, w] {
            try {
              for (size_t k = w; k < m; k += workers) {
                Tape tape;
                losses[k] = instance_backward(g, train[order[begin + k]], cfg, locals[w],
                                              epoch, order[begin + k], tape);
              }
            } catch (...) {
              std::lock_guard<std::mutex> lock(error_mu);
              if (!error) error = std::current_exception();
            }
          });
        }
        for (auto& th : pool) th.join();
        if (error) std::rethrow_exception(error);
        for (int w = 0; w < workers; ++w) {
          auto src = locals[w].all();
          for (size_t pi = 0; pi < param_ptrs.size(); ++pi)
            for (size_t i = 0; i < src[pi]->grad.size(); ++i)
              param_ptrs[pi]->grad[i] += src[pi]->grad[i];
        }
      }

      for (const auto& l : losses) {
        ep_loss += l.total;
        ep_bce += l.bce;
        ep_cr += l.cr;
      }
      if (first_step) {
        result.first_step_cr = losses[0].cr;
        first_step = false;
      }
      seen += m;
      const double inv_m = 1.0 / static_cast<double>(m);
      for (Parameter* p : param_ptrs)
        for (size_t i = 0; i < p->grad.size(); ++i) p->grad[i] *= inv_m;
      opt.step(param_ptrs);
      ++step;
    }

    EpochStats stats;
    stats.epoch = epoch;
    stats.loss = ep_loss / seen;
    stats.bce = ep_bce / seen;
    stats.cr = ep_cr / seen;
    if (valid && !valid->empty()) {
      auto scores = score_instances(g, *valid, params, cfg.pipeline, Rng::mix(cfg.seed, 0xEA0));
      std::vector<int> labels;
      labels.reserve(valid->size());
      for (const auto& inst : *valid) labels.push_back(inst.label);
      stats.has_auc = true;
      stats.auc = auc(scores, labels);
    }
    stats.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    result.epochs.push_back(stats);
  }
  return result;
}

std::vector<double> score_instances(const HinGraph& g,
                                    const std::vector<Instance>& instances,
                                    ModelParams& params, const PipelineConfig& pipeline,
                                    uint64_t seed) {
  std::vector<double> scores;
  scores.reserve(instances.size());
  for (size_t i = 0; i < instances.size(); ++i) {
    uint64_t s = Rng::mix(seed, i + 1);
    Neighbourhood nb = sample_pair(g, instances[i].user, instances[i].item, pipeline, s);
    MaskSet masks = masks_for(g, nb, params.partition(), pipeline, s);
    scores.push_back(predict_score(params, g, nb, masks, instances[i].context));
  }
  return scores;
}

}  // namespace hinctr
