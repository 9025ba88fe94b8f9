#include "hinctr/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

namespace hinctr {

void SamplerBudget::validate(const FeatureSchema& schema) const {
  if (static_cast<int>(per_type.size()) != schema.type_count())
    throw DataError("budget list has " + std::to_string(per_type.size()) +
                    " entries for " + std::to_string(schema.type_count()) + " node types");
  bool any = false;
  for (int s : per_type) {
    if (s < 0) throw DataError("negative sampling budget");
    if (s > 0) any = true;
  }
  if (!any) throw DataError("all sampling budgets are zero");
  if (max_hops < 1) throw DataError("max_hops must be >= 1");
}

std::vector<int> weighted_sample_without_replacement(Rng& rng,
                                                     const std::vector<double>& weights,
                                                     int k) {
  const int n = static_cast<int>(weights.size());
  k = std::min(k, n);
  // key = -ln(u)/w; the k smallest keys form an exact weighted sample.
  std::vector<std::pair<double, int>> keys(n);
  for (int i = 0; i < n; ++i) {
    double w = weights[i] > 0.0 ? weights[i] : 1.0;
    keys[i] = {-std::log(rng.next_open01()) / w, i};
  }
  std::sort(keys.begin(), keys.end());
  std::vector<int> picked;
  picked.reserve(k);
  for (int i = 0; i < k; ++i) picked.push_back(keys[i].second);
  std::sort(picked.begin(), picked.end());
  return picked;
}

std::vector<SampledNode> ghn_sample(const HinGraph& g, int target,
                                    const SamplerBudget& budget) {
  budget.validate(g.schema());
  g.neighbors(target);  // validates the target id
  const int type_count = g.schema().type_count();
  Rng rng(budget.seed);

  std::vector<SampledNode> sampled{{target, 0}};
  std::vector<char> in_set(g.node_count(), 0);
  in_set[target] = 1;
  std::vector<int> taken(type_count, 0);  // excludes the target
  std::vector<int> frontier{target};

  auto budgets_met = [&] {
    for (int k = 0; k < type_count; ++k)
      if (taken[k] < budget.per_type[k]) return false;
    return true;
  };

  for (int hop = 1; hop <= budget.max_hops && !frontier.empty() && !budgets_met(); ++hop) {
    // Candidate set: unvisited neighbours of the previous round.
    std::vector<int> cand;
    for (int node : frontier)
      for (int nb : g.neighbors(node))
        if (!in_set[nb]) cand.push_back(nb);
    std::sort(cand.begin(), cand.end());
    cand.erase(std::unique(cand.begin(), cand.end()), cand.end());
    if (cand.empty()) break;

    // Connection count into the sampled set, before this round's additions.
    std::vector<double> weight(cand.size());
    for (size_t i = 0; i < cand.size(); ++i) {
      int f = 0;
      for (int nb : g.neighbors(cand[i])) f += in_set[nb];
      weight[i] = f;
    }

    // One key per candidate, drawn in ascending-id order regardless of type,
    // so the stream consumed is independent of the per-type partition.
    std::vector<double> key(cand.size());
    for (size_t i = 0; i < cand.size(); ++i) {
      double w = weight[i] > 0.0 ? weight[i] : 1.0;
      key[i] = -std::log(rng.next_open01()) / w;
    }

    std::vector<int> round;
    for (int t = 0; t < type_count; ++t) {
      int want = budget.per_type[t] - taken[t];
      if (want <= 0) continue;
      std::vector<int> of_type;
      for (size_t i = 0; i < cand.size(); ++i)
        if (g.type_of(cand[i]) == t) of_type.push_back(static_cast<int>(i));
      if (of_type.empty()) continue;
      int n_k = std::min<int>(want, static_cast<int>(of_type.size()));
      std::stable_sort(of_type.begin(), of_type.end(),
                       [&](int a, int b) { return key[a] < key[b]; });
      of_type.resize(n_k);
      std::sort(of_type.begin(), of_type.end());  // ascending candidate id
      for (int ci : of_type) {
        round.push_back(cand[ci]);
        ++taken[t];
      }
    }

    for (int node : round) {
      in_set[node] = 1;
      sampled.push_back({node, hop});
    }
    frontier = std::move(round);
  }
  return sampled;
}

std::vector<SampledNode> node_wise_sample(const HinGraph& g, int target,
                                          int fanout, int depth, uint64_t seed) {
  if (fanout < 1) throw DataError("fanout must be >= 1");
  if (depth < 1) throw DataError("depth must be >= 1");
  g.neighbors(target);
  Rng rng(seed);

  std::vector<SampledNode> sampled{{target, 0}};
  std::vector<char> visited(g.node_count(), 0);
  visited[target] = 1;
  std::vector<int> frontier{target};

  for (int hop = 1; hop <= depth && !frontier.empty(); ++hop) {
    std::vector<int> next;
    for (int node : frontier) {
      auto nbs = g.neighbors(node);
      const int deg = static_cast<int>(nbs.size());
      const int picks = std::min(fanout, deg);
      // Partial Fisher-Yates over the sorted neighbour list.
      std::vector<int> pool(nbs.begin(), nbs.end());
      for (int p = 0; p < picks; ++p) {
        int j = p + static_cast<int>(rng.below(static_cast<uint64_t>(deg - p)));
        std::swap(pool[p], pool[j]);
        int chosen = pool[p];
        if (!visited[chosen]) {
          visited[chosen] = 1;
          sampled.push_back({chosen, hop});
          next.push_back(chosen);
        }
      }
    }
    std::sort(next.begin(), next.end());
    frontier = std::move(next);
  }
  return sampled;
}

std::vector<SampledNode> metapath_sample(const HinGraph& g, int target,
                                         const std::vector<std::vector<int>>& metapaths,
                                         int walks_per_path, uint64_t seed) {
  g.neighbors(target);
  if (walks_per_path < 1) throw DataError("walks_per_path must be >= 1");
  for (const auto& path : metapaths) {
    if (path.empty() || path[0] != g.type_of(target))
      throw DataError("metapath must start with the target's type");
  }
  Rng rng(seed);

  std::vector<SampledNode> sampled{{target, 0}};
  std::vector<int> hop_of(g.node_count(), -1);
  hop_of[target] = 0;

  for (const auto& path : metapaths) {
    for (int w = 0; w < walks_per_path; ++w) {
      int cur = target;
      for (size_t step = 1; step < path.size(); ++step) {
        auto cands = g.neighbors(cur, path[step]);
        if (cands.empty()) break;
        cur = cands[rng.below(cands.size())];
        if (hop_of[cur] < 0) {
          hop_of[cur] = static_cast<int>(step);
          sampled.push_back({cur, static_cast<int>(step)});
        }
      }
    }
  }
  return sampled;
}

int Neighbourhood::local_index(int node) const {
  for (int i = 0; i < size(); ++i)
    if (nodes[i] == node) return i;
  return -1;
}

Neighbourhood merge_neighbourhoods(const std::vector<SampledNode>& u_set,
                                   const std::vector<SampledNode>& v_set,
                                   int u, int v) {
  if (u == v) throw DataError("target pair must be two distinct nodes");
  auto contains = [](const std::vector<SampledNode>& s, int node) {
    for (const auto& sn : s)
      if (sn.node == node) return true;
    return false;
  };
  if (!contains(u_set, u)) throw DataError("u-side sample does not contain u");
  if (!contains(v_set, v)) throw DataError("v-side sample does not contain v");

  struct Entry {
    int hop;
    int node;
    Side side;
  };
  std::vector<Entry> rest;
  Side u_side = Side::U, v_side = Side::V;
  {
    std::unordered_map<int, int> u_hops, v_hops;
    for (const auto& sn : u_set)
      if (!u_hops.count(sn.node) || sn.hop < u_hops[sn.node]) u_hops[sn.node] = sn.hop;
    for (const auto& sn : v_set)
      if (!v_hops.count(sn.node) || sn.hop < v_hops[sn.node]) v_hops[sn.node] = sn.hop;
    if (v_hops.count(u)) u_side = Side::Both;
    if (u_hops.count(v)) v_side = Side::Both;
    std::vector<int> ids;
    ids.reserve(u_hops.size() + v_hops.size());
    for (const auto& [node, hop] : u_hops) ids.push_back(node);
    for (const auto& [node, hop] : v_hops)
      if (!u_hops.count(node)) ids.push_back(node);
    for (int node : ids) {
      if (node == u || node == v) continue;
      bool in_u = u_hops.count(node) > 0;
      bool in_v = v_hops.count(node) > 0;
      int hop = in_u && in_v ? std::min(u_hops[node], v_hops[node])
                             : (in_u ? u_hops[node] : v_hops[node]);
      Side side = in_u && in_v ? Side::Both : (in_u ? Side::U : Side::V);
      rest.push_back({hop, node, side});
    }
  }
  std::sort(rest.begin(), rest.end(), [](const Entry& a, const Entry& b) {
    return std::tie(a.hop, a.node) < std::tie(b.hop, b.node);
  });

  Neighbourhood nb;
  nb.nodes = {u, v};
  nb.sides = {u_side, v_side};
  nb.hops = {0, 0};
  for (const auto& e : rest) {
    nb.nodes.push_back(e.node);
    nb.sides.push_back(e.side);
    nb.hops.push_back(e.hop);
  }
  return nb;
}

std::vector<std::pair<int, int>> induced_edges(const HinGraph& g,
                                               const Neighbourhood& nb) {
  std::unordered_map<int, int> local;
  local.reserve(nb.nodes.size());
  for (int i = 0; i < nb.size(); ++i) local.emplace(nb.nodes[i], i);

  std::vector<std::pair<int, int>> edges;
  for (int i = 0; i < nb.size(); ++i) {
    for (int other : g.neighbors(nb.nodes[i])) {
      auto it = local.find(other);
      if (it == local.end()) continue;
      int j = it->second;
      if (i < j) edges.emplace_back(i, j);
    }
  }
  std::sort(edges.begin(), edges.end());
  return edges;
}

}  // namespace hinctr
