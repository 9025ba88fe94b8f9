#pragma once
// Losses and the training loop. Each step draws S neighbourhoods per
// instance, averages the BCE over the S forwards and adds gamma times the
// consistency penalty that pulls the S neighbourhood embeddings towards
// their mean. Instances within a batch may be processed by several workers;
// gradients are merged at one point per step in a fixed order, so a run is
// reproducible from its seed (bitwise so with workers = 1).

#include <cstdint>
#include <vector>

#include "hinctr/instances.hpp"
#include "hinctr/model.hpp"
#include "hinctr/pipeline.hpp"

namespace hinctr {

enum class OptimizerKind : uint8_t { Adam, Sgd };
enum class CrNorm : uint8_t { L2, L1 };
enum class ResampleMode : uint8_t { Fresh, Frozen };

const char* optimizer_kind_name(OptimizerKind k);
OptimizerKind optimizer_kind_from_name(const std::string&);
const char* cr_norm_name(CrNorm n);
CrNorm cr_norm_from_name(const std::string&);
const char* resample_mode_name(ResampleMode m);
ResampleMode resample_mode_from_name(const std::string&);

double bce_loss(double y_hat, int label);
double total_loss(double bce, double cr, double gamma);

// (1/S) * sum_s (1/d_g) * ||g_s - mean(g)||; zero when all samples agree.
double consistency_loss(const std::vector<std::vector<double>>& g_samples,
                        CrNorm norm = CrNorm::L2);

struct TrainConfig {
  ModelConfig model;
  PipelineConfig pipeline;
  std::vector<MaskKind> active_masks{MaskKind::Induced, MaskKind::Similarity,
                                     MaskKind::Cross, MaskKind::Complete};
  double lr = 1e-3;
  int batch_size = 32;
  int epochs = 5;
  int resamples = 2;  // S
  double gamma = 0.1;
  OptimizerKind optimizer = OptimizerKind::Adam;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  CrNorm cr_norm = CrNorm::L2;
  bool cr_enabled = true;
  ResampleMode resample_mode = ResampleMode::Fresh;
  uint64_t seed = 1;
  int workers = 1;

  void validate() const;
};

// Mask kinds the model actually attends through: the configured subset,
// minus the similarity mask under S1/S2 (those strategies route nothing
// into the similarity computation).
std::vector<MaskKind> effective_mask_kinds(const TrainConfig& cfg);

// Seed of the s-th resample of an instance within an epoch. Public so
// replay oracles can rebuild the exact neighbourhood a training step saw.
uint64_t fit_resample_seed(const TrainConfig& cfg, int epoch, size_t instance_index,
                           int s);

// Allocates and initialises a model for this configuration; head kinds are
// derived from the active mask subset.
ModelParams init_model(const FeatureSchema& schema, const TrainConfig& cfg);

class Optimizer {
 public:
  Optimizer(const TrainConfig& cfg, const std::vector<Parameter*>& params);
  void step(const std::vector<Parameter*>& params);

 private:
  OptimizerKind kind_;
  double lr_, b1_, b2_, eps_;
  long long t_ = 0;
  std::vector<Tensor> m_, v_;
};

struct EpochStats {
  int epoch = 0;
  double loss = 0.0;
  double bce = 0.0;
  double cr = 0.0;
  bool has_auc = false;
  double auc = 0.0;
  double seconds = 0.0;
};

struct FitResult {
  std::vector<EpochStats> epochs;
  double first_step_cr = 0.0;
};

FitResult fit(const HinGraph& g, const std::vector<Instance>& train,
              const std::vector<Instance>* valid, const TrainConfig& cfg,
              ModelParams& params);

// Deterministic scores for a list of instances (seed stream per instance).
std::vector<double> score_instances(const HinGraph& g,
                                    const std::vector<Instance>& instances,
                                    ModelParams& params, const PipelineConfig& pipeline,
                                    uint64_t seed);

}  // namespace hinctr
