#pragma once
// Immutable heterogeneous graph store. String node ids from the input files
// are interned to dense integers; adjacency is kept as sorted id lists so
// neighbour queries and edge membership are cheap and deterministic. The
// graph never changes after load, so any number of workers may read it
// concurrently without locks.
//
// Node file: one record per line, tab separated:
//   node_id <TAB> node_type <TAB> group:index[:value],group:index[:value],...
// `value` defaults to 1.0 and must lie in (0, 1]. The third column may be
// empty or "-" when the type has only multi-hot groups. '#' starts a comment.
//
// Edge file: `src_id <TAB> dst_id` per line, undirected. Duplicate edges and
// self loops are dropped (counted in LoadStats).

#include <map>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "hinctr/schema.hpp"

namespace hinctr {

struct LoadStats {
  std::vector<long long> nodes_per_type;                  // by type id
  std::map<std::pair<int, int>, long long> edges_per_type;  // by (min,max) type pair
  long long duplicate_edges = 0;
  long long self_loops = 0;
};

class HinGraph {
 public:
  static HinGraph load(const std::string& node_path, const std::string& edge_path,
                       FeatureSchema schema, LoadStats* stats = nullptr);
  void save(const std::string& node_path, const std::string& edge_path) const;

  int node_count() const { return static_cast<int>(types_.size()); }
  long long edge_count() const { return edge_count_; }

  int type_of(int node) const { return types_.at(node); }
  const SparseFeatureVector& features(int node) const { return features_.at(node); }
  const std::string& node_name(int node) const { return names_.at(node); }

  int find_node(const std::string& name) const;  // -1 if unknown
  int node_id(const std::string& name) const;    // throws DataError

  // Sorted dense ids adjacent to `node`.
  std::span<const int> neighbors(int node) const;
  // Same, restricted to one node type.
  std::vector<int> neighbors(int node, int type_filter) const;

  int degree(int node) const { return static_cast<int>(neighbors(node).size()); }
  bool has_edge(int a, int b) const;

  const FeatureSchema& schema() const { return schema_; }

  LoadStats count_stats() const;

 private:
  void check_node(int node) const;

  FeatureSchema schema_;
  std::vector<std::string> names_;
  std::vector<int> types_;
  std::vector<SparseFeatureVector> features_;
  std::vector<std::vector<int>> adj_;
  std::unordered_map<std::string, int> name_to_id_;
  long long edge_count_ = 0;
};

}  // namespace hinctr
