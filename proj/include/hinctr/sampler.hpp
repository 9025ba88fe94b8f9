#pragma once
// Neighbour samplers over the heterogeneous graph. All samplers are pure
// functions of (graph, target, parameters, seed); each call owns its RNG
// stream, so instances can be sampled concurrently.
//
// Determinism contract (relied on by replay oracles):
//  - ghn_sample: per hop, candidates are enumerated in ascending dense id;
//    one key u = rng.next_open01() is drawn per candidate in that order,
//    giving the exponential key -ln(u) / weight. Per type (ascending type
//    id) the n_k smallest keys win, ties broken by ascending id.
//  - node_wise_sample: frontier processed in ascending id; per node a
//    partial Fisher-Yates over its sorted neighbour list draws
//    min(fanout, degree) picks.
//  - metapath_sample: paths in the given order, walks in order; each step
//    picks uniformly (rng.below) from the sorted type-filtered neighbours.

#include <cstdint>
#include <vector>

#include "hinctr/graph.hpp"
#include "hinctr/rng.hpp"

namespace hinctr {

// Per-type sampling budget for greedy heterogeneous sampling. `max_hops`
// bounds the number of sampling rounds so pathological graphs terminate.
struct SamplerBudget {
  std::vector<int> per_type;  // s_k, indexed by type id
  int max_hops = 4;
  uint64_t seed = 0;

  void validate(const FeatureSchema& schema) const;
};

struct SampledNode {
  int node = 0;
  int hop = 0;  // sampling round in which the node entered the set; target = 0
};

// Greedy heterogeneous neighbour sampling. Expands hop by hop; at each hop
// every unvisited neighbour of the previous round is a candidate, weighted
// by its connection count into the already-sampled set, and per type at
// most (s_k - |sampled_k|) candidates are kept via weighted sampling
// without replacement (exponential keys). Stops when every budget is met,
// the frontier empties, or max_hops is reached. The target itself is
// always returned first and never counts against its type budget.
std::vector<SampledNode> ghn_sample(const HinGraph& g, int target,
                                    const SamplerBudget& budget);

// Uniform recursive fanout sampling (node-wise baseline).
std::vector<SampledNode> node_wise_sample(const HinGraph& g, int target,
                                          int fanout, int depth, uint64_t seed);

// Random walks constrained to type sequences (metapath baseline). Every
// metapath must start with the target's type; `walks_per_path` walks are
// attempted per path and a walk dies when no neighbour of the required
// type exists.
std::vector<SampledNode> metapath_sample(const HinGraph& g, int target,
                                         const std::vector<std::vector<int>>& metapaths,
                                         int walks_per_path, uint64_t seed);

enum class Side : uint8_t { U, V, Both };

// Merged neighbourhood of a (u, v) pair: u first, v second, the remaining
// nodes ordered by (min hop over the two sides, id). Nodes sampled from
// both sides appear once, flagged Side::Both.
struct Neighbourhood {
  std::vector<int> nodes;
  std::vector<Side> sides;
  std::vector<int> hops;

  int u() const { return nodes[0]; }
  int v() const { return nodes[1]; }
  int size() const { return static_cast<int>(nodes.size()); }
  int local_index(int node) const;  // -1 if absent
};

Neighbourhood merge_neighbourhoods(const std::vector<SampledNode>& u_set,
                                   const std::vector<SampledNode>& v_set,
                                   int u, int v);

// All edges of g with both endpoints in the neighbourhood, one entry per
// undirected edge as (i, j) local indices with i < j.
std::vector<std::pair<int, int>> induced_edges(const HinGraph& g,
                                               const Neighbourhood& nb);

// Exposed for the sampler tests: weighted sampling without replacement by
// exponential keys. Draws one key per weight in index order and returns the
// indices of the k smallest keys in ascending index order.
std::vector<int> weighted_sample_without_replacement(Rng& rng,
                                                     const std::vector<double>& weights,
                                                     int k);

}  // namespace hinctr
