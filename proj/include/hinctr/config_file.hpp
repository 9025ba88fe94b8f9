#pragma once
// Structured-text configuration: `key = value` per line, '#' comments.
// Values stay strings until a typed getter parses them; unknown keys are
// reported after construction so typos fail loudly.

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "hinctr/errors.hpp"
#include "hinctr/train.hpp"

namespace hinctr {

class KvConfig {
 public:
  static KvConfig parse_text(const std::string& text, const std::string& origin);
  static KvConfig load(const std::string& path);

  void set(const std::string& key, const std::string& value);  // overrides
  bool has(const std::string& key) const;

  std::string get_str(const std::string& key, const std::string& fallback) const;
  long long get_int(const std::string& key, long long fallback) const;
  double get_double(const std::string& key, double fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  uint64_t get_u64(const std::string& key, uint64_t fallback) const;

  // Keys never read by any getter; call after all gets.
  std::vector<std::string> unused_keys() const;

 private:
  std::string origin_ = "<config>";
  std::map<std::string, std::string> values_;
  mutable std::set<std::string> used_;
};

// Builds a TrainConfig from configuration keys (see README for the list).
TrainConfig train_config_from(const KvConfig& kv);

// "user=8,item=4" -> map
std::map<std::string, int> parse_budget_list(const std::string& text);
// "IG,SG,CG,PG"
std::vector<MaskKind> parse_mask_list(const std::string& text);
// "user,publisher,item;user,item"
std::vector<std::vector<std::string>> parse_metapaths(const std::string& text);

}  // namespace hinctr
