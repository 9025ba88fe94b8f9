#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <map>
#include <set>

#include "hinctr/sampler.hpp"
#include "test_util.hpp"

using namespace hinctr;
using testutil::TempDir;
using testutil::write_file;

namespace {

std::vector<std::pair<int, int>> dense_edges(const HinGraph& g,
                                             const testutil::RandomHin& hin) {
  std::vector<std::pair<int, int>> out;
  for (const auto& [a, b] : hin.edge_names)
    out.emplace_back(g.node_id(a), g.node_id(b));
  return out;
}

// Independent step-by-step simulation of the greedy sampler. Connection
// counts are recomputed by scanning a raw edge list instead of the
// adjacency structure; the RNG contract (one key per candidate in
// ascending id order per hop) is shared with the implementation.
std::vector<SampledNode> ghn_oracle(const HinGraph& g,
                                    const std::vector<std::pair<int, int>>& edges,
                                    int target, const std::vector<int>& budget,
                                    int max_hops, uint64_t seed) {
  Rng rng(seed);
  std::set<int> in_set{target};
  std::vector<int> taken(g.schema().type_count(), 0);
  std::vector<SampledNode> out{{target, 0}};
  std::vector<int> frontier{target};

  auto all_met = [&] {
    for (size_t k = 0; k < budget.size(); ++k)
      if (taken[k] < budget[k]) return false;
    return true;
  };

  for (int hop = 1; hop <= max_hops; ++hop) {
    if (frontier.empty() || all_met()) break;
    std::set<int> cand_set;
    for (int f : frontier)
      for (const auto& [a, b] : edges) {
        if (a == f && !in_set.count(b)) cand_set.insert(b);
        if (b == f && !in_set.count(a)) cand_set.insert(a);
      }
    if (cand_set.empty()) break;
    std::vector<int> cand(cand_set.begin(), cand_set.end());

    std::vector<double> key(cand.size());
    for (size_t i = 0; i < cand.size(); ++i) {
      int f_t = 0;
      for (const auto& [a, b] : edges) {
        if (b == cand[i] && in_set.count(a)) ++f_t;
        if (a == cand[i] && in_set.count(b)) ++f_t;
      }
      double w = f_t > 0 ? f_t : 1.0;
      key[i] = -std::log(rng.next_open01()) / w;
    }

    std::vector<int> round;
    for (int t = 0; t < g.schema().type_count(); ++t) {
      int want = budget[t] - taken[t];
      if (want <= 0) continue;
      std::vector<int> of_type;
      for (size_t i = 0; i < cand.size(); ++i)
        if (g.type_of(cand[i]) == t) of_type.push_back(static_cast<int>(i));
      if (of_type.empty()) continue;
      int n_k = std::min<int>(want, static_cast<int>(of_type.size()));
      std::stable_sort(of_type.begin(), of_type.end(),
                       [&](int a, int b) { return key[a] < key[b]; });
      of_type.resize(n_k);
      std::sort(of_type.begin(), of_type.end());
      for (int ci : of_type) {
        round.push_back(cand[ci]);
        ++taken[t];
      }
    }
    for (int node : round) {
      in_set.insert(node);
      out.push_back({node, hop});
    }
    frontier = round;
  }
  return out;
}

bool same_sample(const std::vector<SampledNode>& a, const std::vector<SampledNode>& b) {
  if (a.size() != b.size()) return false;
  for (size_t i = 0; i < a.size(); ++i)
    if (a[i].node != b[i].node || a[i].hop != b[i].hop) return false;
  return true;
}

}  // namespace

TEST_CASE("isolated target samples only itself") {
  TempDir dir;
  write_file(dir.file("nodes.tsv"), "a\tuser\tseg:0\nb\tuser\tseg:1\n");
  write_file(dir.file("edges.tsv"), "");
  write_file(dir.file("schema.txt"), testutil::RandomHin::kSchema);
  HinGraph g = HinGraph::load(dir.file("nodes.tsv"), dir.file("edges.tsv"),
                              FeatureSchema::load(dir.file("schema.txt")));
  SamplerBudget budget{{2, 2, 2}, 4, 7};
  auto s = ghn_sample(g, g.node_id("a"), budget);
  REQUIRE(s.size() == 1);
  CHECK(s[0].node == g.node_id("a"));
  CHECK(s[0].hop == 0);

  CHECK(node_wise_sample(g, g.node_id("a"), 3, 2, 1).size() == 1);
  CHECK(metapath_sample(g, g.node_id("a"), {{0, 1}}, 4, 1).size() == 1);
}

TEST_CASE("star graph with loose budgets keeps every leaf at hop 1") {
  TempDir dir;
  std::string nodes = "hub\tuser\tseg:0\n";
  std::string edges;
  for (int i = 0; i < 6; ++i) {
    nodes += "i" + std::to_string(i) + "\titem\tcat:0\n";
    edges += "hub\ti" + std::to_string(i) + "\n";
  }
  write_file(dir.file("nodes.tsv"), nodes);
  write_file(dir.file("edges.tsv"), edges);
  write_file(dir.file("schema.txt"), testutil::RandomHin::kSchema);
  HinGraph g = HinGraph::load(dir.file("nodes.tsv"), dir.file("edges.tsv"),
                              FeatureSchema::load(dir.file("schema.txt")));
  SamplerBudget budget{{0, 10, 0}, 4, 3};
  auto s = ghn_sample(g, g.node_id("hub"), budget);
  REQUIRE(s.size() == 7);
  for (size_t i = 1; i < s.size(); ++i) CHECK(s[i].hop == 1);
}

TEST_CASE("greedy sampler matches the step-by-step simulation on a fixture") {
  TempDir dir;
  // 12 nodes, binding budgets force a second hop.
  write_file(dir.file("nodes.tsv"),
             "u0\tuser\tseg:0\nu1\tuser\tseg:1\nu2\tuser\tseg:2\nu3\tuser\tseg:3\n"
             "i0\titem\tcat:0\ni1\titem\tcat:1\ni2\titem\tcat:2\ni3\titem\tcat:3\n"
             "x0\textra\t-\nx1\textra\t-\nx2\textra\t-\nx3\textra\t-\n");
  write_file(dir.file("edges.tsv"),
             "u0\ti0\nu0\ti1\nu0\tx0\nu0\tu1\n"
             "i0\tu2\ni0\tx1\ni1\tu2\ni1\tu3\n"
             "x0\ti2\nx0\ti3\nu1\ti2\nu2\ti3\n"
             "x1\tu3\nx2\tu3\nx1\tx3\n");
  write_file(dir.file("schema.txt"), testutil::RandomHin::kSchema);
  HinGraph g = HinGraph::load(dir.file("nodes.tsv"), dir.file("edges.tsv"),
                              FeatureSchema::load(dir.file("schema.txt")));
  std::vector<std::pair<int, int>> edges;
  {
    std::vector<std::pair<const char*, const char*>> raw = {
        {"u0", "i0"}, {"u0", "i1"}, {"u0", "x0"}, {"u0", "u1"}, {"i0", "u2"},
        {"i0", "x1"}, {"i1", "u2"}, {"i1", "u3"}, {"x0", "i2"}, {"x0", "i3"},
        {"u1", "i2"}, {"u2", "i3"}, {"x1", "u3"}, {"x2", "u3"}, {"x1", "x3"}};
    for (auto [a, b] : raw) edges.emplace_back(g.node_id(a), g.node_id(b));
  }
  for (uint64_t seed : {1ULL, 7ULL, 99ULL, 1234ULL}) {
    SamplerBudget budget{{2, 2, 1}, 4, seed};
    auto got = ghn_sample(g, g.node_id("u0"), budget);
    auto want = ghn_oracle(g, edges, g.node_id("u0"), budget.per_type, 4, seed);
    CHECK(same_sample(got, want));
  }
}

TEST_CASE("greedy sampler matches the simulation on random graphs") {
  Rng meta(2024);
  for (int trial = 0; trial < 20; ++trial) {
    TempDir dir;
    auto hin = testutil::make_random_hin(dir, meta, 8, 8, 6, 0.15);
    const HinGraph& g = hin.graph;
    auto edges = dense_edges(g, hin);
    std::vector<int> budget = {static_cast<int>(meta.below(4)),
                               static_cast<int>(meta.below(4)) + 1,
                               static_cast<int>(meta.below(3))};
    uint64_t seed = meta.next_u64();
    int target = static_cast<int>(meta.below(g.node_count()));
    auto got = ghn_sample(g, target, SamplerBudget{budget, 4, seed});
    auto want = ghn_oracle(g, edges, target, budget, 4, seed);
    CHECK(same_sample(got, want));
  }
}

TEST_CASE("greedy sampler properties: budgets, greediness, determinism") {
  Rng meta(77);
  for (int trial = 0; trial < 30; ++trial) {
    TempDir dir;
    auto hin = testutil::make_random_hin(dir, meta, 10, 10, 8, 0.12);
    const HinGraph& g = hin.graph;
    std::vector<int> budget = {static_cast<int>(meta.below(5)),
                               static_cast<int>(meta.below(5)),
                               static_cast<int>(meta.below(5)) + 1};
    uint64_t seed = meta.next_u64();
    int target = static_cast<int>(meta.below(g.node_count()));
    SamplerBudget b{budget, 4, seed};
    auto s = ghn_sample(g, target, b);

    std::vector<int> taken(3, 0);
    std::set<int> seen;
    for (const auto& sn : s) {
      CHECK(seen.insert(sn.node).second);  // no duplicates
      if (sn.node != target) ++taken[g.type_of(sn.node)];
    }
    for (int t = 0; t < 3; ++t) CHECK(taken[t] <= budget[t]);

    // hop greediness: types whose 1-hop supply covers the budget fill at hop 1
    std::vector<int> one_hop(3, 0);
    for (int nb : g.neighbors(target)) ++one_hop[g.type_of(nb)];
    for (const auto& sn : s) {
      if (sn.node == target) continue;
      int t = g.type_of(sn.node);
      if (one_hop[t] >= budget[t]) CHECK(sn.hop == 1);
    }

    CHECK(same_sample(s, ghn_sample(g, target, b)));
  }
}

TEST_CASE("node-wise sampler") {
  TempDir dir;
  Rng meta(5);
  auto hin = testutil::make_random_hin(dir, meta, 8, 8, 6, 0.2);
  const HinGraph& g = hin.graph;

  SUBCASE("depth 1 with fanout >= degree returns all 1-hop neighbours") {
    int target = 0;
    auto s = node_wise_sample(g, target, g.node_count(), 1, 3);
    std::set<int> got;
    for (const auto& sn : s)
      if (sn.node != target) got.insert(sn.node);
    auto nbs = g.neighbors(target);
    CHECK(got == std::set<int>(nbs.begin(), nbs.end()));
  }

  SUBCASE("replay with the same seed reproduces the draw sequence") {
    for (uint64_t seed : {3ULL, 11ULL, 12345ULL}) {
      auto got = node_wise_sample(g, 1, 2, 2, seed);

      // independent replay following the documented contract
      Rng rng(seed);
      std::vector<SampledNode> want{{1, 0}};
      std::set<int> visited{1};
      std::vector<int> frontier{1};
      for (int hop = 1; hop <= 2 && !frontier.empty(); ++hop) {
        std::vector<int> next;
        for (int node : frontier) {
          auto span = g.neighbors(node);
          std::vector<int> pool(span.begin(), span.end());
          int deg = static_cast<int>(pool.size());
          int picks = std::min(2, deg);
          for (int p = 0; p < picks; ++p) {
            int j = p + static_cast<int>(rng.below(static_cast<uint64_t>(deg - p)));
            std::swap(pool[p], pool[j]);
            if (visited.insert(pool[p]).second) {
              want.push_back({pool[p], hop});
              next.push_back(pool[p]);
            }
          }
        }
        std::sort(next.begin(), next.end());
        frontier = next;
      }
      CHECK(same_sample(got, want));
    }
  }

  SUBCASE("argument validation") {
    CHECK_THROWS_AS(node_wise_sample(g, 0, 0, 1, 1), DataError);
    CHECK_THROWS_AS(node_wise_sample(g, 0, 1, 0, 1), DataError);
  }
}

TEST_CASE("metapath sampler") {
  TempDir dir;
  Rng meta(6);
  auto hin = testutil::make_random_hin(dir, meta, 8, 8, 6, 0.2);
  const HinGraph& g = hin.graph;
  const int user = 0, item = 1, extra = 2;

  SUBCASE("length-1 path yields only the target") {
    auto s = metapath_sample(g, 0, {{user}}, 4, 1);
    CHECK(s.size() == 1);
  }

  SUBCASE("path must start at the target's type") {
    CHECK_THROWS_AS(metapath_sample(g, 0, {{item, user}}, 4, 1), DataError);
  }

  SUBCASE("walks die when no typed neighbour exists") {
    TempDir d2;
    write_file(d2.file("nodes.tsv"), "a\tuser\tseg:0\nb\tuser\tseg:1\n");
    write_file(d2.file("edges.tsv"), "a\tb\n");
    write_file(d2.file("schema.txt"), testutil::RandomHin::kSchema);
    HinGraph g2 = HinGraph::load(d2.file("nodes.tsv"), d2.file("edges.tsv"),
                                 FeatureSchema::load(d2.file("schema.txt")));
    auto s = metapath_sample(g2, 0, {{user, item}}, 4, 9);
    CHECK(s.size() == 1);  // no user-item edges anywhere
  }

  SUBCASE("replay oracle") {
    std::vector<std::vector<int>> paths = {{user, extra, item}, {user, item}};
    for (uint64_t seed : {2ULL, 71ULL}) {
      auto got = metapath_sample(g, 2, paths, 3, seed);

      Rng rng(seed);
      std::vector<SampledNode> want{{2, 0}};
      std::map<int, int> hop_of{{2, 0}};
      for (const auto& path : paths) {
        for (int w = 0; w < 3; ++w) {
          int cur = 2;
          for (size_t step = 1; step < path.size(); ++step) {
            auto cands = g.neighbors(cur, path[step]);
            if (cands.empty()) break;
            cur = cands[rng.below(cands.size())];
            if (!hop_of.count(cur)) {
              hop_of[cur] = static_cast<int>(step);
              want.push_back({cur, static_cast<int>(step)});
            }
          }
        }
      }
      CHECK(same_sample(got, want));
    }
  }
}

TEST_CASE("merge_neighbourhoods") {
  SUBCASE("disjoint sets add up") {
    std::vector<SampledNode> us = {{0, 0}, {2, 1}, {3, 1}};
    std::vector<SampledNode> vs = {{1, 0}, {4, 1}, {5, 2}};
    auto nb = merge_neighbourhoods(us, vs, 0, 1);
    CHECK(nb.size() == 6);
    CHECK(nb.u() == 0);
    CHECK(nb.v() == 1);
    CHECK(nb.sides[0] == Side::U);
    CHECK(nb.sides[1] == Side::V);
    for (int i = 2; i < 6; ++i) CHECK(nb.sides[i] != Side::Both);
  }

  SUBCASE("identical sets flag every non-target node as both") {
    std::vector<SampledNode> us = {{0, 0}, {1, 1}, {7, 1}, {8, 2}};
    std::vector<SampledNode> vs = {{1, 0}, {0, 1}, {7, 1}, {8, 2}};
    auto nb = merge_neighbourhoods(us, vs, 0, 1);
    CHECK(nb.size() == 4);
    CHECK(nb.sides[0] == Side::Both);  // u was also sampled on the v side
    CHECK(nb.sides[1] == Side::Both);
    CHECK(nb.sides[2] == Side::Both);
    CHECK(nb.sides[3] == Side::Both);
  }

  SUBCASE("overlap counting and stable order") {
    std::vector<SampledNode> us = {{0, 0}, {2, 1}, {3, 1}, {4, 2}, {6, 2}};
    std::vector<SampledNode> vs = {{1, 0}, {3, 1}, {4, 1}, {6, 1}, {9, 2}};
    auto nb1 = merge_neighbourhoods(us, vs, 0, 1);
    auto nb2 = merge_neighbourhoods(us, vs, 0, 1);
    CHECK(nb1.nodes == nb2.nodes);  // stable across runs
    int overlap = 0;
    for (auto s : nb1.sides)
      if (s == Side::Both) ++overlap;
    CHECK(overlap == 3);  // set-intersection oracle: {3, 4, 6}
    // order: u, v, then (min hop, id)
    CHECK(nb1.nodes == std::vector<int>{0, 1, 2, 3, 4, 6, 9});
    CHECK(nb1.hops == std::vector<int>{0, 0, 1, 1, 1, 1, 2});
  }

  SUBCASE("validation") {
    std::vector<SampledNode> us = {{0, 0}};
    std::vector<SampledNode> vs = {{1, 0}};
    CHECK_THROWS_AS(merge_neighbourhoods(us, vs, 0, 0), DataError);
    CHECK_THROWS_AS(merge_neighbourhoods(us, vs, 2, 1), DataError);
  }
}

TEST_CASE("induced_edges") {
  TempDir dir;
  Rng meta(9);
  auto hin = testutil::make_random_hin(dir, meta, 8, 8, 6, 0.25);
  const HinGraph& g = hin.graph;

  SUBCASE("two unconnected nodes give an empty list") {
    int a = -1, b = -1;
    for (int i = 0; i < g.node_count() && a < 0; ++i)
      for (int j = 0; j < g.node_count(); ++j)
        if (i != j && !g.has_edge(i, j) && g.type_of(i) == 0 && g.type_of(j) == 1) {
          a = i;
          b = j;
          break;
        }
    REQUIRE(a >= 0);
    auto nb = merge_neighbourhoods({{a, 0}}, {{b, 0}}, a, b);
    CHECK(induced_edges(g, nb).empty());
  }

  SUBCASE("whole graph reproduces the full edge list") {
    std::vector<SampledNode> us, vs;
    for (int i = 0; i < g.node_count(); ++i) us.push_back({i, i == 0 ? 0 : 1});
    vs = {{1, 0}};
    auto nb = merge_neighbourhoods(us, vs, 0, 1);
    auto edges = induced_edges(g, nb);
    CHECK(static_cast<long long>(edges.size()) == g.edge_count());
  }

  SUBCASE("random neighbourhood matches the pairwise scan") {
    for (int trial = 0; trial < 10; ++trial) {
      std::vector<SampledNode> us{{0, 0}}, vs{{1, 0}};
      std::set<int> chosen{0, 1};
      while (chosen.size() < 8) {
        int n = static_cast<int>(meta.below(g.node_count()));
        if (chosen.insert(n).second)
          (meta.next_bool() ? us : vs).push_back({n, 1});
      }
      auto nb = merge_neighbourhoods(us, vs, 0, 1);
      auto edges = induced_edges(g, nb);

      std::vector<std::pair<int, int>> want;
      for (int i = 0; i < nb.size(); ++i)
        for (int j = i + 1; j < nb.size(); ++j)
          if (g.has_edge(nb.nodes[i], nb.nodes[j])) want.emplace_back(i, j);
      std::sort(want.begin(), want.end());
      CHECK(edges == want);
    }
  }

  SUBCASE("edge list is invariant to neighbourhood order up to relabeling") {
    std::vector<SampledNode> us{{0, 0}, {2, 1}, {4, 1}}, vs{{1, 0}, {3, 1}, {5, 1}};
    auto nb1 = merge_neighbourhoods(us, vs, 0, 1);
    std::vector<SampledNode> us2{{0, 0}, {4, 1}, {2, 2}}, vs2{{1, 0}, {5, 1}, {3, 2}};
    auto nb2 = merge_neighbourhoods(us2, vs2, 0, 1);
    auto e1 = induced_edges(g, nb1);
    auto e2 = induced_edges(g, nb2);
    std::set<std::pair<int, int>> names1, names2;
    for (auto [i, j] : e1)
      names1.insert(std::minmax(nb1.nodes[i], nb1.nodes[j]));
    for (auto [i, j] : e2)
      names2.insert(std::minmax(nb2.nodes[i], nb2.nodes[j]));
    CHECK(names1 == names2);
  }
}
