#include "hinctr/graph.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace hinctr {

namespace {

// Splits on single tabs; trailing empty fields are preserved.
std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> out;
  size_t start = 0;
  while (true) {
    size_t tab = line.find('\t', start);
    if (tab == std::string::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
}

bool is_blank_or_comment(const std::string& line) {
  for (char c : line) {
    if (c == '#') return true;
    if (!isspace(static_cast<unsigned char>(c))) return false;
  }
  return true;
}

std::string fmt_value(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

HinGraph HinGraph::load(const std::string& node_path, const std::string& edge_path,
                        FeatureSchema schema, LoadStats* stats) {
  schema.validate();
  HinGraph g;
  g.schema_ = std::move(schema);

  std::ifstream nodes_in(node_path);
  if (!nodes_in) throw DataError("cannot open node file '" + node_path + "'");
  std::string line;
  int lineno = 0;
  auto fail = [&](const std::string& file, const std::string& msg) {
    throw DataError(file + ":" + std::to_string(lineno) + ": " + msg);
  };

  while (std::getline(nodes_in, line)) {
    ++lineno;
    if (is_blank_or_comment(line)) continue;
    auto cols = split_tabs(line);
    if (cols.size() < 2 || cols.size() > 3)
      fail(node_path, "expected 2 or 3 tab-separated columns");
    const std::string& name = cols[0];
    if (name.empty()) fail(node_path, "empty node id");
    if (g.name_to_id_.count(name)) fail(node_path, "duplicate node id '" + name + "'");
    int type = g.schema_.find_type(cols[1]);
    if (type < 0) fail(node_path, "unknown node type '" + cols[1] + "'");

    SparseFeatureVector fv;
    fv.groups.assign(g.schema_.group_count(type), {});
    if (cols.size() == 3 && !cols[2].empty() && cols[2] != "-") {
      std::istringstream fs(cols[2]);
      std::string entry;
      while (std::getline(fs, entry, ',')) {
        auto c1 = entry.find(':');
        if (c1 == std::string::npos) fail(node_path, "bad feature entry '" + entry + "'");
        auto c2 = entry.find(':', c1 + 1);
        std::string gname = entry.substr(0, c1);
        std::string idx_s = (c2 == std::string::npos) ? entry.substr(c1 + 1)
                                                      : entry.substr(c1 + 1, c2 - c1 - 1);
        int gi = g.schema_.find_group(type, gname);
        if (gi < 0) fail(node_path, "unknown group '" + gname + "' for type '" + cols[1] + "'");
        int idx = -1;
        try {
          idx = std::stoi(idx_s);
        } catch (const std::exception&) {
          fail(node_path, "bad feature index '" + idx_s + "'");
        }
        if (idx < 0 || idx >= g.schema_.group(type, gi).dim)
          fail(node_path, "feature index " + std::to_string(idx) + " out of range for group '" +
                              gname + "' (dim " + std::to_string(g.schema_.group(type, gi).dim) + ")");
        double value = 1.0;
        if (c2 != std::string::npos) {
          try {
            value = std::stod(entry.substr(c2 + 1));
          } catch (const std::exception&) {
            fail(node_path, "bad feature value in '" + entry + "'");
          }
        }
        if (!(value > 0.0 && value <= 1.0))
          fail(node_path, "feature value " + fmt_value(value) + " outside (0,1]");
        fv.groups[gi].emplace_back(idx, value);
      }
    }
    for (int gi = 0; gi < g.schema_.group_count(type); ++gi) {
      auto& entries = fv.groups[gi];
      std::sort(entries.begin(), entries.end());
      for (size_t k = 1; k < entries.size(); ++k)
        if (entries[k].first == entries[k - 1].first)
          fail(node_path, "duplicate index " + std::to_string(entries[k].first) +
                              " in group '" + g.schema_.group(type, gi).name + "'");
      if (g.schema_.group(type, gi).kind == EncodingKind::OneHot && entries.size() != 1)
        fail(node_path, "one-hot group '" + g.schema_.group(type, gi).name + "' needs exactly one entry, got " +
                            std::to_string(entries.size()));
    }

    int id = static_cast<int>(g.types_.size());
    g.name_to_id_.emplace(name, id);
    g.names_.push_back(name);
    g.types_.push_back(type);
    g.features_.push_back(std::move(fv));
  }
  g.adj_.assign(g.types_.size(), {});

  long long dup = 0, loops = 0;
  std::ifstream edges_in(edge_path);
  if (!edges_in) throw DataError("cannot open edge file '" + edge_path + "'");
  lineno = 0;
  std::vector<std::pair<int, int>> edges;
  while (std::getline(edges_in, line)) {
    ++lineno;
    if (is_blank_or_comment(line)) continue;
    auto cols = split_tabs(line);
    if (cols.size() != 2) fail(edge_path, "expected 2 tab-separated columns");
    auto a_it = g.name_to_id_.find(cols[0]);
    if (a_it == g.name_to_id_.end()) fail(edge_path, "edge references missing node '" + cols[0] + "'");
    auto b_it = g.name_to_id_.find(cols[1]);
    if (b_it == g.name_to_id_.end()) fail(edge_path, "edge references missing node '" + cols[1] + "'");
    int a = a_it->second, b = b_it->second;
    if (a == b) {
      ++loops;
      continue;
    }
    edges.emplace_back(std::min(a, b), std::max(a, b));
  }
  std::sort(edges.begin(), edges.end());
  for (size_t i = 0; i < edges.size(); ++i) {
    if (i > 0 && edges[i] == edges[i - 1]) {
      ++dup;
      continue;
    }
    g.adj_[edges[i].first].push_back(edges[i].second);
    g.adj_[edges[i].second].push_back(edges[i].first);
    ++g.edge_count_;
  }
  for (auto& a : g.adj_) std::sort(a.begin(), a.end());

  if (stats) {
    *stats = g.count_stats();
    stats->duplicate_edges = dup;
    stats->self_loops = loops;
  }
  return g;
}

void HinGraph::save(const std::string& node_path, const std::string& edge_path) const {
  std::ofstream nodes_out(node_path);
  if (!nodes_out) throw DataError("cannot write node file '" + node_path + "'");
  for (int i = 0; i < node_count(); ++i) {
    nodes_out << names_[i] << '\t' << schema_.type_name(types_[i]) << '\t';
    bool first = true;
    for (int gi = 0; gi < static_cast<int>(features_[i].groups.size()); ++gi) {
      for (const auto& [idx, value] : features_[i].groups[gi]) {
        if (!first) nodes_out << ',';
        first = false;
        nodes_out << schema_.group(types_[i], gi).name << ':' << idx;
        if (value != 1.0) nodes_out << ':' << fmt_value(value);
      }
    }
    if (first) nodes_out << '-';
    nodes_out << '\n';
  }
  std::ofstream edges_out(edge_path);
  if (!edges_out) throw DataError("cannot write edge file '" + edge_path + "'");
  for (int i = 0; i < node_count(); ++i)
    for (int j : adj_[i])
      if (i < j) edges_out << names_[i] << '\t' << names_[j] << '\n';
}

int HinGraph::find_node(const std::string& name) const {
  auto it = name_to_id_.find(name);
  return it == name_to_id_.end() ? -1 : it->second;
}

int HinGraph::node_id(const std::string& name) const {
  int id = find_node(name);
  if (id < 0) throw DataError("unknown node id '" + name + "'");
  return id;
}

std::span<const int> HinGraph::neighbors(int node) const {
  check_node(node);
  return adj_[node];
}

std::vector<int> HinGraph::neighbors(int node, int type_filter) const {
  check_node(node);
  std::vector<int> out;
  for (int n : adj_[node])
    if (types_[n] == type_filter) out.push_back(n);
  return out;
}

bool HinGraph::has_edge(int a, int b) const {
  check_node(a);
  check_node(b);
  const auto& adj = adj_[a].size() <= adj_[b].size() ? adj_[a] : adj_[b];
  int other = adj_[a].size() <= adj_[b].size() ? b : a;
  return std::binary_search(adj.begin(), adj.end(), other);
}

LoadStats HinGraph::count_stats() const {
  LoadStats s;
  s.nodes_per_type.assign(schema_.type_count(), 0);
  for (int t : types_) ++s.nodes_per_type[t];
  for (int i = 0; i < node_count(); ++i)
    for (int j : adj_[i])
      if (i < j) {
        auto key = std::minmax(types_[i], types_[j]);
        ++s.edges_per_type[{key.first, key.second}];
      }
  return s;
}

void HinGraph::check_node(int node) const {
  if (node < 0 || node >= node_count())
    throw DataError("unknown node id " + std::to_string(node));
}

}  // namespace hinctr
