#include "hinctr/pipeline.hpp"

namespace hinctr {

const char* sampler_kind_name(SamplerKind k) {
  switch (k) {
    case SamplerKind::Ghn: return "ghn";
    case SamplerKind::NodeWise: return "nodewise";
    case SamplerKind::Metapath: return "metapath";
  }
  return "?";
}

SamplerKind sampler_kind_from_name(const std::string& name) {
  if (name == "ghn") return SamplerKind::Ghn;
  if (name == "nodewise") return SamplerKind::NodeWise;
  if (name == "metapath") return SamplerKind::Metapath;
  throw DataError("unknown sampler '" + name + "' (expected ghn, nodewise or metapath)");
}

void PipelineConfig::validate() const {
  if (default_budget < 0) throw DataError("default budget must be >= 0");
  if (max_hops < 1) throw DataError("max_hops must be >= 1");
  if (fanout < 1 || depth < 1) throw DataError("fanout and depth must be >= 1");
  if (walks_per_path < 1) throw DataError("walks_per_path must be >= 1");
  if (sim_mode == SimilarityMode::Knn && sim_k < 1) throw DataError("sim_k must be >= 1");
  if (k_ts < 1) throw DataError("K_ts must be >= 1");
  for (const auto& [type, b] : budgets)
    if (b < 0) throw DataError("budget for '" + type + "' must be >= 0");
}

SamplerBudget resolve_budget(const PipelineConfig& cfg, const FeatureSchema& schema,
                             uint64_t seed) {
  SamplerBudget b;
  b.per_type.assign(schema.type_count(), cfg.default_budget);
  for (const auto& [type, count] : cfg.budgets)
    b.per_type[schema.type_id(type)] = count;
  b.max_hops = cfg.max_hops;
  b.seed = seed;
  return b;
}

std::vector<SampledNode> run_sampler(const HinGraph& g, int target,
                                     const PipelineConfig& cfg, uint64_t seed) {
  switch (cfg.sampler) {
    case SamplerKind::Ghn:
      return ghn_sample(g, target, resolve_budget(cfg, g.schema(), seed));
    case SamplerKind::NodeWise:
      return node_wise_sample(g, target, cfg.fanout, cfg.depth, seed);
    case SamplerKind::Metapath: {
      std::vector<std::vector<int>> paths;
      for (const auto& names : cfg.metapaths) {
        std::vector<int> path;
        for (const auto& name : names) path.push_back(g.schema().type_id(name));
        if (!path.empty() && path[0] == g.type_of(target)) paths.push_back(std::move(path));
      }
      if (paths.empty()) return {{target, 0}};
      return metapath_sample(g, target, paths, cfg.walks_per_path, seed);
    }
  }
  throw DataError("unhandled sampler kind");
}

Neighbourhood sample_pair(const HinGraph& g, int u, int v, const PipelineConfig& cfg,
                          uint64_t seed) {
  auto u_set = run_sampler(g, u, cfg, Rng::mix(seed, 1));
  auto v_set = run_sampler(g, v, cfg, Rng::mix(seed, 2));
  return merge_neighbourhoods(u_set, v_set, u, v);
}

MaskSet masks_for(const HinGraph& g, const Neighbourhood& nb,
                  const FeaturePartition& partition, const PipelineConfig& cfg,
                  uint64_t seed) {
  return build_mask_set(g, nb, partition, cfg.sim_mode, cfg.sim_k, Rng::mix(seed, 3));
}

}  // namespace hinctr
