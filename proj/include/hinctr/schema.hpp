#pragma once
// Feature schema of a heterogeneous graph: node types, per-type categorical
// feature groups (one-hot or multi-hot, each with a fixed dimension), and a
// registry of feature groups shared between node types. Shared groups align
// comparable fields across types (e.g. a common tag vocabulary) and drive
// the restricted-cosine similarity.
//
// Schema file grammar (line oriented, UTF-8, '#' starts a comment):
//
//   type   <type_name>
//   group  <type_name> <group_name> <dim> <one_hot|multi_hot>
//   shared <type_a> <type_b> <group_in_a>:<group_in_b>[,...]
//
// Every type implicitly shares all of its own groups with itself; self
// sharing must not be declared. A `shared` line declares both directions.

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "hinctr/errors.hpp"

namespace hinctr {

enum class EncodingKind : uint8_t { OneHot, MultiHot };

struct FeatureGroup {
  std::string name;
  int dim = 0;
  EncodingKind kind = EncodingKind::MultiHot;
};

class FeatureSchema {
 public:
  int add_type(const std::string& name);
  void add_group(int type, const std::string& name, int dim, EncodingKind kind);
  void add_shared(int type_a, int group_a, int type_b, int group_b);

  int type_count() const { return static_cast<int>(type_names_.size()); }
  const std::string& type_name(int t) const { return type_names_.at(t); }
  int type_id(const std::string& name) const;   // throws DataError if unknown
  int find_type(const std::string& name) const; // -1 if unknown

  int group_count(int t) const { return static_cast<int>(groups_.at(t).size()); }
  const FeatureGroup& group(int t, int g) const { return groups_.at(t).at(g); }
  int find_group(int t, const std::string& name) const;

  // Aligned lists of shared group indices: first in t_a's schema, second in
  // t_b's, pairwise in order. (t, t) returns every group paired with itself.
  std::pair<std::vector<int>, std::vector<int>> shared_groups(int t_a, int t_b) const;

  void validate() const;

  // Order-sensitive FNV-1a hash of the canonical text form; stored in
  // checkpoints so a model is never evaluated against a different schema.
  uint64_t fingerprint() const;

  std::string to_text() const;
  static FeatureSchema parse_text(const std::string& text, const std::string& origin);
  static FeatureSchema load(const std::string& path);
  void save(const std::string& path) const;

 private:
  struct SharedEntry {
    int ta = 0, tb = 0;               // ta < tb
    std::vector<int> ga, gb;          // aligned, ga[i] in ta, gb[i] in tb
  };

  std::vector<std::string> type_names_;
  std::vector<std::vector<FeatureGroup>> groups_;  // [type][group]
  std::vector<SharedEntry> shared_;
};

// Sparse feature vector of one node: per group a list of (index, value)
// entries sorted by index, values in (0, 1]. One-hot groups carry exactly
// one entry, multi-hot groups zero or more.
struct SparseFeatureVector {
  std::vector<std::vector<std::pair<int, double>>> groups;
};

}  // namespace hinctr
