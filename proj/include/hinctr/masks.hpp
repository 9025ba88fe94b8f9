#pragma once
// The four interaction-graph masks built over a merged neighbourhood:
//   induced    — 0/1, edges retrieved from the graph
//   similarity — weighted restricted-cosine scores, or a 0/1 k-NN pruning
//   cross      — 0/1, complete bipartite between the u-side and v-side
//   complete   — all ones
// Every mask is a dense symmetric n x n matrix with a forced unit diagonal
// so no attention row is ever fully masked.
//
// FeaturePartition routes each feature group either into the node input,
// into the similarity computation, both, or neither, following the four
// exploitation strategies over a dimension threshold K_ts.

#include <cstdint>
#include <vector>

#include "hinctr/graph.hpp"
#include "hinctr/sampler.hpp"

namespace hinctr {

enum class MaskKind : uint8_t { Induced, Similarity, Cross, Complete };

const char* mask_kind_name(MaskKind kind);         // "IG", "SG", "CG", "PG"
MaskKind mask_kind_from_name(const std::string&);  // throws DataError

struct Mask {
  int n = 0;
  MaskKind kind = MaskKind::Complete;
  std::vector<double> w;  // row-major n*n, entries >= 0

  Mask() = default;
  Mask(int n_, MaskKind kind_) : n(n_), kind(kind_), w(static_cast<size_t>(n_) * n_, 0.0) {}
  double at(int i, int j) const { return w[static_cast<size_t>(i) * n + j]; }
  double& at(int i, int j) { return w[static_cast<size_t>(i) * n + j]; }
};

struct MaskSet {
  Mask induced, similarity, cross, complete;
  int n = 0;

  const Mask& by_kind(MaskKind kind) const;
};

// Strategy S1: every group feeds the node input, similarity unused.
// Strategy S2: groups with dim > K_ts are dropped entirely.
// Strategy S3: every group feeds the node input; groups with dim > K_ts
//              additionally feed the similarity computation.
// Strategy S4: groups with dim > K_ts are removed from the node input and
//              routed to the similarity computation instead.
enum class Strategy : uint8_t { S1, S2, S3, S4 };

const char* strategy_name(Strategy s);
Strategy strategy_from_name(const std::string&);  // throws DataError

struct FeaturePartition {
  Strategy strategy = Strategy::S3;
  long long k_ts = 1;
  std::vector<std::vector<int>> node_input_groups;  // [type] -> sorted group ids
  std::vector<std::vector<int>> similarity_groups;  // [type] -> sorted group ids

  bool in_similarity(int type, int group) const;
};

FeaturePartition partition_feature_groups(const FeatureSchema& schema,
                                          Strategy strategy, long long k_ts);

// Cosine similarity restricted to the groups shared by the two node types
// and routed to similarity by the partition. 0 when nothing is shared or
// either restricted vector has zero norm.
double similarity(const SparseFeatureVector& fi, const SparseFeatureVector& fj,
                  const FeatureSchema& schema, int t_i, int t_j,
                  const FeaturePartition& partition);

Mask build_induced_mask(int n, const std::vector<std::pair<int, int>>& edges);

enum class SimilarityMode : uint8_t { Weighted, Knn };

// Weighted mode: entries are the raw similarity scores. Knn mode: 1 where
// either endpoint ranks the other among its k most similar neighbours with
// strictly positive similarity (OR-symmetrised), else 0.
Mask build_similarity_mask(const Neighbourhood& nb, const HinGraph& g,
                           const FeaturePartition& partition, SimilarityMode mode,
                           int k = 0);

// Partitions the neighbourhood into the u side (0) and v side (1). Nodes
// sampled from both sides go to the side holding more of their induced
// edges; exact ties are broken by the seeded RNG. u and v are always forced
// onto their own sides.
std::vector<int> assign_sides(const Neighbourhood& nb,
                              const std::vector<std::pair<int, int>>& edges,
                              uint64_t seed);

Mask build_cross_mask(const std::vector<int>& sides);

Mask build_complete_mask(int n);

MaskSet build_mask_set(const HinGraph& g, const Neighbourhood& nb,
                       const FeaturePartition& partition, SimilarityMode mode,
                       int knn_k, uint64_t seed);

}  // namespace hinctr
