#pragma once
// Shared data path between training and evaluation: how a (u, v) pair turns
// into a merged neighbourhood and its mask set. Stored alongside the model
// in checkpoints so evaluation reproduces the training-time sampling.

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "hinctr/masks.hpp"

namespace hinctr {

enum class SamplerKind : uint8_t { Ghn, NodeWise, Metapath };

const char* sampler_kind_name(SamplerKind k);
SamplerKind sampler_kind_from_name(const std::string&);

struct PipelineConfig {
  SamplerKind sampler = SamplerKind::Ghn;
  std::map<std::string, int> budgets;  // per type name; absent types use default_budget
  int default_budget = 8;
  int max_hops = 4;
  int fanout = 5;   // node-wise
  int depth = 2;    // node-wise
  std::vector<std::vector<std::string>> metapaths;  // type-name sequences
  int walks_per_path = 8;
  SimilarityMode sim_mode = SimilarityMode::Weighted;
  int sim_k = 5;
  Strategy strategy = Strategy::S3;
  long long k_ts = 1;
  std::string user_type = "user";
  std::string item_type = "item";

  void validate() const;
};

SamplerBudget resolve_budget(const PipelineConfig& cfg, const FeatureSchema& schema,
                             uint64_t seed);

// Runs the configured sampler for one target. Metapath sampling uses only
// the paths whose first type matches the target.
std::vector<SampledNode> run_sampler(const HinGraph& g, int target,
                                     const PipelineConfig& cfg, uint64_t seed);

// Samples both sides and merges; u and v keep their own derived seeds so
// the two sides are independent streams of one master seed.
Neighbourhood sample_pair(const HinGraph& g, int u, int v, const PipelineConfig& cfg,
                          uint64_t seed);

MaskSet masks_for(const HinGraph& g, const Neighbourhood& nb,
                  const FeaturePartition& partition, const PipelineConfig& cfg,
                  uint64_t seed);

}  // namespace hinctr
