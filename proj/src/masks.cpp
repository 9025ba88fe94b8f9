#include "hinctr/masks.hpp"

#include <algorithm>
#include <cmath>

namespace hinctr {

const char* mask_kind_name(MaskKind kind) {
  switch (kind) {
    case MaskKind::Induced: return "IG";
    case MaskKind::Similarity: return "SG";
    case MaskKind::Cross: return "CG";
    case MaskKind::Complete: return "PG";
  }
  return "?";
}

MaskKind mask_kind_from_name(const std::string& name) {
  if (name == "IG") return MaskKind::Induced;
  if (name == "SG") return MaskKind::Similarity;
  if (name == "CG") return MaskKind::Cross;
  if (name == "PG") return MaskKind::Complete;
  throw DataError("unknown mask kind '" + name + "' (expected IG, SG, CG or PG)");
}

const Mask& MaskSet::by_kind(MaskKind kind) const {
  switch (kind) {
    case MaskKind::Induced: return induced;
    case MaskKind::Similarity: return similarity;
    case MaskKind::Cross: return cross;
    case MaskKind::Complete: return complete;
  }
  return complete;
}

const char* strategy_name(Strategy s) {
  switch (s) {
    case Strategy::S1: return "S1";
    case Strategy::S2: return "S2";
    case Strategy::S3: return "S3";
    case Strategy::S4: return "S4";
  }
  return "?";
}

Strategy strategy_from_name(const std::string& name) {
  if (name == "S1") return Strategy::S1;
  if (name == "S2") return Strategy::S2;
  if (name == "S3") return Strategy::S3;
  if (name == "S4") return Strategy::S4;
  throw DataError("unknown strategy '" + name + "' (expected S1..S4)");
}

bool FeaturePartition::in_similarity(int type, int group) const {
  const auto& v = similarity_groups.at(type);
  return std::binary_search(v.begin(), v.end(), group);
}

FeaturePartition partition_feature_groups(const FeatureSchema& schema,
                                          Strategy strategy, long long k_ts) {
  if (k_ts < 1) throw DataError("K_ts must be >= 1");
  FeaturePartition p;
  p.strategy = strategy;
  p.k_ts = k_ts;
  p.node_input_groups.resize(schema.type_count());
  p.similarity_groups.resize(schema.type_count());
  for (int t = 0; t < schema.type_count(); ++t) {
    for (int g = 0; g < schema.group_count(t); ++g) {
      bool wide = schema.group(t, g).dim > k_ts;
      switch (strategy) {
        case Strategy::S1:
          p.node_input_groups[t].push_back(g);
          break;
        case Strategy::S2:
          if (!wide) p.node_input_groups[t].push_back(g);
          break;
        case Strategy::S3:
          p.node_input_groups[t].push_back(g);
          if (wide) p.similarity_groups[t].push_back(g);
          break;
        case Strategy::S4:
          if (wide)
            p.similarity_groups[t].push_back(g);
          else
            p.node_input_groups[t].push_back(g);
          break;
      }
    }
  }
  return p;
}

namespace {

double sparse_dot(const std::vector<std::pair<int, double>>& a,
                  const std::vector<std::pair<int, double>>& b) {
  double dot = 0.0;
  size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i].first < b[j].first) {
      ++i;
    } else if (a[i].first > b[j].first) {
      ++j;
    } else {
      dot += a[i].second * b[j].second;
      ++i;
      ++j;
    }
  }
  return dot;
}

double sparse_norm_sq(const std::vector<std::pair<int, double>>& a) {
  double s = 0.0;
  for (const auto& [idx, v] : a) s += v * v;
  return s;
}

}  // namespace

double similarity(const SparseFeatureVector& fi, const SparseFeatureVector& fj,
                  const FeatureSchema& schema, int t_i, int t_j,
                  const FeaturePartition& partition) {
  auto [gi, gj] = schema.shared_groups(t_i, t_j);
  double dot = 0.0, ni = 0.0, nj = 0.0;
  for (size_t k = 0; k < gi.size(); ++k) {
    if (!partition.in_similarity(t_i, gi[k]) || !partition.in_similarity(t_j, gj[k]))
      continue;
    dot += sparse_dot(fi.groups.at(gi[k]), fj.groups.at(gj[k]));
    ni += sparse_norm_sq(fi.groups.at(gi[k]));
    nj += sparse_norm_sq(fj.groups.at(gj[k]));
  }
  if (ni <= 0.0 || nj <= 0.0) return 0.0;
  return dot / (std::sqrt(ni) * std::sqrt(nj));
}

Mask build_induced_mask(int n, const std::vector<std::pair<int, int>>& edges) {
  Mask m(n, MaskKind::Induced);
  for (int i = 0; i < n; ++i) m.at(i, i) = 1.0;
  for (const auto& [i, j] : edges) {
    if (i < 0 || j < 0 || i >= n || j >= n)
      throw DataError("induced edge endpoint out of range");
    m.at(i, j) = 1.0;
    m.at(j, i) = 1.0;
  }
  return m;
}

Mask build_similarity_mask(const Neighbourhood& nb, const HinGraph& g,
                           const FeaturePartition& partition, SimilarityMode mode,
                           int k) {
  const int n = nb.size();
  Mask m(n, MaskKind::Similarity);

  std::vector<double> sim(static_cast<size_t>(n) * n, 0.0);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      double s = similarity(g.features(nb.nodes[i]), g.features(nb.nodes[j]),
                            g.schema(), g.type_of(nb.nodes[i]), g.type_of(nb.nodes[j]),
                            partition);
      sim[static_cast<size_t>(i) * n + j] = s;
      sim[static_cast<size_t>(j) * n + i] = s;
    }
  }

  if (mode == SimilarityMode::Weighted) {
    m.w = sim;
    for (int i = 0; i < n; ++i) m.at(i, i) = 1.0;
    return m;
  }

  if (k < 1) throw DataError("k-NN similarity mask needs k >= 1");
  // Per row keep the k largest strictly-positive scores (ties by lower
  // index), then symmetrise with OR.
  for (int i = 0; i < n; ++i) {
    std::vector<int> order;
    for (int j = 0; j < n; ++j)
      if (j != i && sim[static_cast<size_t>(i) * n + j] > 0.0) order.push_back(j);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
      return sim[static_cast<size_t>(i) * n + a] > sim[static_cast<size_t>(i) * n + b];
    });
    int keep = std::min<int>(k, static_cast<int>(order.size()));
    for (int r = 0; r < keep; ++r) {
      m.at(i, order[r]) = 1.0;
      m.at(order[r], i) = 1.0;
    }
  }
  for (int i = 0; i < n; ++i) m.at(i, i) = 1.0;
  return m;
}

std::vector<int> assign_sides(const Neighbourhood& nb,
                              const std::vector<std::pair<int, int>>& edges,
                              uint64_t seed) {
  const int n = nb.size();
  // Induced-edge counts into the exclusively-u and exclusively-v flagged
  // nodes. Edges towards overlapped nodes would add to both counts equally
  // and cannot change the comparison, so they are skipped.
  std::vector<int> to_u(n, 0), to_v(n, 0);
  auto flag_of = [&](int idx) {
    if (idx == 0) return Side::U;  // targets count for their own side
    if (idx == 1) return Side::V;
    return nb.sides[idx];
  };
  auto tally = [&](int from, int other) {
    Side s = flag_of(other);
    if (s == Side::U) ++to_u[from];
    if (s == Side::V) ++to_v[from];
  };
  for (const auto& [i, j] : edges) {
    tally(i, j);
    tally(j, i);
  }

  Rng rng(seed);
  std::vector<int> side(n, 0);
  for (int i = 0; i < n; ++i) {
    if (i == 0) {
      side[i] = 0;
    } else if (i == 1) {
      side[i] = 1;
    } else if (nb.sides[i] == Side::U) {
      side[i] = 0;
    } else if (nb.sides[i] == Side::V) {
      side[i] = 1;
    } else if (to_u[i] != to_v[i]) {
      side[i] = to_u[i] > to_v[i] ? 0 : 1;
    } else {
      side[i] = static_cast<int>(rng.below(2));
    }
  }
  return side;
}

Mask build_cross_mask(const std::vector<int>& sides) {
  const int n = static_cast<int>(sides.size());
  Mask m(n, MaskKind::Cross);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      m.at(i, j) = (i == j || sides[i] != sides[j]) ? 1.0 : 0.0;
  return m;
}

Mask build_complete_mask(int n) {
  if (n < 1) throw DataError("mask dimension must be >= 1");
  Mask m(n, MaskKind::Complete);
  std::fill(m.w.begin(), m.w.end(), 1.0);
  return m;
}

MaskSet build_mask_set(const HinGraph& g, const Neighbourhood& nb,
                       const FeaturePartition& partition, SimilarityMode mode,
                       int knn_k, uint64_t seed) {
  MaskSet ms;
  ms.n = nb.size();
  auto edges = induced_edges(g, nb);
  ms.induced = build_induced_mask(ms.n, edges);
  ms.similarity = build_similarity_mask(nb, g, partition, mode, knn_k);
  ms.cross = build_cross_mask(assign_sides(nb, edges, seed));
  ms.complete = build_complete_mask(ms.n);
  return ms;
}

}  // namespace hinctr
