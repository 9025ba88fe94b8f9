#include "hinctr/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <set>
#include <unordered_set>
#include <vector>

#include "hinctr/rng.hpp"

namespace hinctr {

void SynthConfig::validate() const {
  if (users < 1 || items < 1 || publishers < 1 || articles < 1)
    throw DataError("node counts must be >= 1");
  if (tag_space < 1 || tags_per_node < 1 || communities < 1)
    throw DataError("tag space, tags per node and communities must be >= 1");
  if (tags_per_node > tag_space) throw DataError("tags_per_node exceeds tag space");
  if (!(in_community >= 0.0 && in_community <= 1.0))
    throw DataError("in_community must lie in [0,1]");
  if (!(noise >= 0.0 && noise <= 1.0)) throw DataError("noise must lie in [0,1]");
  if (!(positive_rate > 0.0 && positive_rate < 1.0))
    throw DataError("positive_rate must lie in (0,1)");
  if (subs_per_user < 0 || item_clicks_per_user < 0 || article_clicks_per_user < 0)
    throw DataError("per-user edge counts must be >= 0");
  if (train_instances < 1 || test_instances < 1)
    throw DataError("instance counts must be >= 1");
}

SynthPaths SynthPaths::in_dir(const std::string& dir) {
  SynthPaths p;
  p.nodes = dir + "/nodes.tsv";
  p.edges = dir + "/edges.tsv";
  p.schema = dir + "/schema.txt";
  p.train = dir + "/train.tsv";
  p.test = dir + "/test.tsv";
  return p;
}

namespace {

struct World {
  // node communities per type
  std::vector<int> user_comm, item_comm, pub_comm, art_comm;
  // sorted tag lists per node
  std::vector<std::vector<int>> user_tags, item_tags, pub_tags, art_tags;
  // nuisance one-hot features
  std::vector<int> user_segment, item_category;
  // edges
  std::vector<int> item_publisher;                 // exactly one per item
  std::vector<int> article_publisher;              // exactly one per article
  std::vector<std::vector<int>> user_subs;         // publisher ids
  std::vector<std::vector<int>> user_item_clicks;  // item ids
  std::vector<std::vector<int>> user_art_clicks;   // article ids
};

std::vector<int> draw_tags(Rng& rng, const SynthConfig& cfg, int community) {
  // Tags are split into contiguous per-community blocks; a node draws from
  // its own block with probability in_community, otherwise uniformly. The
  // per-node count varies in [2, tags_per_node] so pairwise cosines take
  // many distinct values.
  const int block = cfg.tag_space / cfg.communities;
  const int want = cfg.tags_per_node < 2
                       ? cfg.tags_per_node
                       : 2 + static_cast<int>(rng.below(cfg.tags_per_node - 1));
  std::set<int> tags;
  int guard = 0;
  while (static_cast<int>(tags.size()) < want && ++guard < 10000) {
    int tag;
    if (block > 0 && rng.next_double() < cfg.in_community) {
      tag = community * block + static_cast<int>(rng.below(block));
      if (tag >= cfg.tag_space) tag = static_cast<int>(rng.below(cfg.tag_space));
    } else {
      tag = static_cast<int>(rng.below(cfg.tag_space));
    }
    tags.insert(tag);
  }
  return {tags.begin(), tags.end()};
}

int pick_in_community(Rng& rng, const SynthConfig& cfg, const std::vector<int>& comm_of,
                      const std::vector<std::vector<int>>& by_comm, int community) {
  if (!by_comm[community].empty() && rng.next_double() < cfg.in_community) {
    const auto& pool = by_comm[community];
    return pool[rng.below(pool.size())];
  }
  return static_cast<int>(rng.below(comm_of.size()));
}

std::vector<std::vector<int>> group_by_community(const std::vector<int>& comm_of,
                                                 int communities) {
  std::vector<std::vector<int>> by(communities);
  for (size_t i = 0; i < comm_of.size(); ++i) by[comm_of[i]].push_back(static_cast<int>(i));
  return by;
}

World build_world(const SynthConfig& cfg) {
  World w;
  Rng rng(Rng::mix(cfg.seed, 0x57A7E));

  auto assign_comm = [&](int count) {
    std::vector<int> comm(count);
    for (auto& c : comm) c = static_cast<int>(rng.below(cfg.communities));
    return comm;
  };
  w.user_comm = assign_comm(cfg.users);
  w.item_comm = assign_comm(cfg.items);
  w.pub_comm = assign_comm(cfg.publishers);
  w.art_comm = assign_comm(cfg.articles);

  auto assign_tags = [&](const std::vector<int>& comm) {
    std::vector<std::vector<int>> tags(comm.size());
    for (size_t i = 0; i < comm.size(); ++i) tags[i] = draw_tags(rng, cfg, comm[i]);
    return tags;
  };
  w.user_tags = assign_tags(w.user_comm);
  w.item_tags = assign_tags(w.item_comm);
  w.pub_tags = assign_tags(w.pub_comm);
  w.art_tags = assign_tags(w.art_comm);

  w.user_segment.resize(cfg.users);
  for (auto& s : w.user_segment) s = static_cast<int>(rng.below(8));
  w.item_category.resize(cfg.items);
  for (auto& c : w.item_category) c = static_cast<int>(rng.below(8));

  auto pubs_by_comm = group_by_community(w.pub_comm, cfg.communities);
  auto items_by_comm = group_by_community(w.item_comm, cfg.communities);
  auto arts_by_comm = group_by_community(w.art_comm, cfg.communities);

  w.item_publisher.resize(cfg.items);
  for (int i = 0; i < cfg.items; ++i)
    w.item_publisher[i] = pick_in_community(rng, cfg, w.pub_comm, pubs_by_comm, w.item_comm[i]);
  w.article_publisher.resize(cfg.articles);
  for (int a = 0; a < cfg.articles; ++a)
    w.article_publisher[a] = pick_in_community(rng, cfg, w.pub_comm, pubs_by_comm, w.art_comm[a]);

  auto draw_many = [&](int user, int count, const std::vector<int>& comm_of,
                       const std::vector<std::vector<int>>& by_comm) {
    std::set<int> chosen;
    int guard = 0;
    while (static_cast<int>(chosen.size()) < count &&
           static_cast<int>(chosen.size()) < static_cast<int>(comm_of.size()) &&
           ++guard < 100 * count + 1000) {
      chosen.insert(pick_in_community(rng, cfg, comm_of, by_comm, w.user_comm[user]));
    }
    return std::vector<int>(chosen.begin(), chosen.end());
  };
  w.user_subs.resize(cfg.users);
  w.user_item_clicks.resize(cfg.users);
  w.user_art_clicks.resize(cfg.users);
  for (int u = 0; u < cfg.users; ++u) {
    w.user_subs[u] = draw_many(u, cfg.subs_per_user, w.pub_comm, pubs_by_comm);
    w.user_item_clicks[u] = draw_many(u, cfg.item_clicks_per_user, w.item_comm, items_by_comm);
    w.user_art_clicks[u] = draw_many(u, cfg.article_clicks_per_user, w.art_comm, arts_by_comm);
  }
  return w;
}

double tag_cosine(const std::vector<int>& a, const std::vector<int>& b) {
  if (a.empty() || b.empty()) return 0.0;
  size_t i = 0, j = 0, common = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i] < b[j]) {
      ++i;
    } else if (a[i] > b[j]) {
      ++j;
    } else {
      ++common;
      ++i;
      ++j;
    }
  }
  return static_cast<double>(common) /
         (std::sqrt(static_cast<double>(a.size())) * std::sqrt(static_cast<double>(b.size())));
}

}  // namespace

void synth(const SynthConfig& cfg, const SynthPaths& paths) {
  cfg.validate();
  World w = build_world(cfg);

  {
    std::ofstream schema(paths.schema);
    if (!schema) throw DataError("cannot write '" + paths.schema + "'");
    schema << "# synthetic benchmark schema\n";
    schema << "type user\ntype item\ntype publisher\ntype article\n";
    schema << "group user tags " << cfg.tag_space << " multi_hot\n";
    schema << "group user segment 8 one_hot\n";
    schema << "group item tags " << cfg.tag_space << " multi_hot\n";
    schema << "group item category 8 one_hot\n";
    schema << "group publisher tags " << cfg.tag_space << " multi_hot\n";
    schema << "group article tags " << cfg.tag_space << " multi_hot\n";
    schema << "shared user item tags:tags\n";
    schema << "shared user publisher tags:tags\n";
    schema << "shared user article tags:tags\n";
    schema << "shared item publisher tags:tags\n";
    schema << "shared item article tags:tags\n";
    schema << "shared publisher article tags:tags\n";
  }

  {
    std::ofstream nodes(paths.nodes);
    if (!nodes) throw DataError("cannot write '" + paths.nodes + "'");
    auto tag_field = [](const std::vector<int>& tags) {
      std::string s;
      for (size_t i = 0; i < tags.size(); ++i)
        s += (i ? "," : "") + ("tags:" + std::to_string(tags[i]));
      return s;
    };
    for (int u = 0; u < cfg.users; ++u)
      nodes << "u" << u << "\tuser\t" << tag_field(w.user_tags[u])
            << (w.user_tags[u].empty() ? "" : ",") << "segment:" << w.user_segment[u] << "\n";
    for (int i = 0; i < cfg.items; ++i)
      nodes << "i" << i << "\titem\t" << tag_field(w.item_tags[i])
            << (w.item_tags[i].empty() ? "" : ",") << "category:" << w.item_category[i] << "\n";
    for (int p = 0; p < cfg.publishers; ++p)
      nodes << "p" << p << "\tpublisher\t" << tag_field(w.pub_tags[p]) << "\n";
    for (int a = 0; a < cfg.articles; ++a)
      nodes << "a" << a << "\tarticle\t" << tag_field(w.art_tags[a]) << "\n";
  }

  {
    std::ofstream edges(paths.edges);
    if (!edges) throw DataError("cannot write '" + paths.edges + "'");
    for (int i = 0; i < cfg.items; ++i)
      edges << "p" << w.item_publisher[i] << "\ti" << i << "\n";
    for (int a = 0; a < cfg.articles; ++a)
      edges << "p" << w.article_publisher[a] << "\ta" << a << "\n";
    for (int u = 0; u < cfg.users; ++u) {
      for (int p : w.user_subs[u]) edges << "u" << u << "\tp" << p << "\n";
      for (int i : w.user_item_clicks[u]) edges << "u" << u << "\ti" << i << "\n";
      for (int a : w.user_art_clicks[u]) edges << "u" << u << "\ta" << a << "\n";
    }
  }

  // Candidate pairs: unique (u, v), half biased towards the user's own
  // community so every label cause is well represented.
  Rng rng(Rng::mix(cfg.seed, 0x1A57));
  const int want = cfg.train_instances + cfg.test_instances;
  std::vector<std::pair<int, int>> pairs;
  {
    auto items_by_comm = group_by_community(w.item_comm, cfg.communities);
    std::unordered_set<long long> seen;
    int guard = 0;
    while (static_cast<int>(pairs.size()) < want && ++guard < want * 200) {
      int u = static_cast<int>(rng.below(cfg.users));
      int v;
      const auto& pool = items_by_comm[w.user_comm[u]];
      if (!pool.empty() && rng.next_double() < 0.5) {
        v = pool[rng.below(pool.size())];
      } else {
        v = static_cast<int>(rng.below(cfg.items));
      }
      long long key = static_cast<long long>(u) * cfg.items + v;
      if (seen.insert(key).second) pairs.emplace_back(u, v);
    }
    if (static_cast<int>(pairs.size()) < want)
      throw DataError("not enough distinct user-item pairs for the requested instances");
  }

  std::vector<char> sub_lookup(static_cast<size_t>(cfg.users) * cfg.publishers, 0);
  for (int u = 0; u < cfg.users; ++u)
    for (int p : w.user_subs[u]) sub_lookup[static_cast<size_t>(u) * cfg.publishers + p] = 1;

  std::vector<double> score(pairs.size());
  for (size_t k = 0; k < pairs.size(); ++k) {
    auto [u, v] = pairs[k];
    double s = 0.0;
    if (w.user_comm[u] == w.item_comm[v]) s += cfg.w_community;
    s += cfg.w_tags * tag_cosine(w.user_tags[u], w.item_tags[v]);
    int pub = w.item_publisher[v];
    if (sub_lookup[static_cast<size_t>(u) * cfg.publishers + pub]) s += cfg.w_publisher;
    score[k] = s;
  }

  // Labels are a pure threshold on the structural score. The threshold is
  // the distinct score value whose inclusive cut lands closest to the
  // requested positive rate; tied pairs are never split.
  std::vector<double> sorted = score;
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  double threshold = sorted.front();
  double best_gap = 2.0;
  for (size_t i = 0; i < sorted.size(); ++i) {
    if (i + 1 < sorted.size() && sorted[i + 1] == sorted[i]) continue;
    double share = static_cast<double>(i + 1) / static_cast<double>(sorted.size());
    double gap = std::abs(share - cfg.positive_rate);
    if (gap < best_gap) {
      best_gap = gap;
      threshold = sorted[i];
    }
    if (share > cfg.positive_rate) break;
  }

  std::vector<int> label(pairs.size());
  for (size_t k = 0; k < pairs.size(); ++k) {
    label[k] = score[k] >= threshold ? 1 : 0;
    if (cfg.noise > 0.0 && rng.next_double() < cfg.noise) label[k] = 1 - label[k];
  }

  auto write_instances = [&](const std::string& path, size_t begin, size_t end) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write '" + path + "'");
    for (size_t k = begin; k < end; ++k)
      out << "u" << pairs[k].first << "\ti" << pairs[k].second << "\t" << label[k] << "\n";
  };
  write_instances(paths.train, 0, cfg.train_instances);
  write_instances(paths.test, cfg.train_instances, pairs.size());
}

}  // namespace hinctr
