#include "hinctr/config_file.hpp"

#include <fstream>
#include <sstream>

namespace hinctr {

namespace {

std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace

KvConfig KvConfig::parse_text(const std::string& text, const std::string& origin) {
  KvConfig kv;
  kv.origin_ = origin;
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    std::string t = trim(line);
    if (t.empty()) continue;
    auto eq = t.find('=');
    if (eq == std::string::npos)
      throw DataError(origin + ":" + std::to_string(lineno) + ": expected key = value");
    std::string key = trim(t.substr(0, eq));
    std::string value = trim(t.substr(eq + 1));
    if (key.empty())
      throw DataError(origin + ":" + std::to_string(lineno) + ": empty key");
    kv.values_[key] = value;
  }
  return kv;
}

KvConfig KvConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_text(buf.str(), path);
}

void KvConfig::set(const std::string& key, const std::string& value) {
  values_[key] = value;
}

bool KvConfig::has(const std::string& key) const { return values_.count(key) > 0; }

std::string KvConfig::get_str(const std::string& key, const std::string& fallback) const {
  used_.insert(key);
  auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

long long KvConfig::get_int(const std::string& key, long long fallback) const {
  used_.insert(key);
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  try {
    size_t pos = 0;
    long long v = std::stoll(it->second, &pos);
    if (pos != it->second.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw DataError(origin_ + ": key '" + key + "' is not an integer: '" + it->second + "'");
  }
}

double KvConfig::get_double(const std::string& key, double fallback) const {
  used_.insert(key);
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  try {
    size_t pos = 0;
    double v = std::stod(it->second, &pos);
    if (pos != it->second.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw DataError(origin_ + ": key '" + key + "' is not a number: '" + it->second + "'");
  }
}

bool KvConfig::get_bool(const std::string& key, bool fallback) const {
  used_.insert(key);
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  if (it->second == "true" || it->second == "1") return true;
  if (it->second == "false" || it->second == "0") return false;
  throw DataError(origin_ + ": key '" + key + "' is not a boolean: '" + it->second + "'");
}

uint64_t KvConfig::get_u64(const std::string& key, uint64_t fallback) const {
  used_.insert(key);
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  try {
    size_t pos = 0;
    unsigned long long v = std::stoull(it->second, &pos);
    if (pos != it->second.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw DataError(origin_ + ": key '" + key + "' is not an unsigned integer: '" +
                    it->second + "'");
  }
}

std::vector<std::string> KvConfig::unused_keys() const {
  std::vector<std::string> out;
  for (const auto& [k, v] : values_)
    if (!used_.count(k)) out.push_back(k);
  return out;
}

std::map<std::string, int> parse_budget_list(const std::string& text) {
  std::map<std::string, int> out;
  std::istringstream is(text);
  std::string item;
  while (std::getline(is, item, ',')) {
    if (item.empty()) continue;
    auto eq = item.find('=');
    if (eq == std::string::npos)
      throw DataError("budget entry '" + item + "' must be type=count");
    try {
      out[item.substr(0, eq)] = std::stoi(item.substr(eq + 1));
    } catch (const std::exception&) {
      throw DataError("bad budget count in '" + item + "'");
    }
  }
  return out;
}

std::vector<MaskKind> parse_mask_list(const std::string& text) {
  std::vector<MaskKind> out;
  std::istringstream is(text);
  std::string item;
  while (std::getline(is, item, ','))
    if (!item.empty()) out.push_back(mask_kind_from_name(item));
  if (out.empty()) throw DataError("mask list must not be empty");
  return out;
}

std::vector<std::vector<std::string>> parse_metapaths(const std::string& text) {
  std::vector<std::vector<std::string>> out;
  std::istringstream paths(text);
  std::string path;
  while (std::getline(paths, path, ';')) {
    std::vector<std::string> types;
    std::istringstream ts(path);
    std::string t;
    while (std::getline(ts, t, ','))
      if (!t.empty()) types.push_back(t);
    if (!types.empty()) out.push_back(std::move(types));
  }
  return out;
}

TrainConfig train_config_from(const KvConfig& kv) {
  TrainConfig cfg;
  cfg.model.d = static_cast<int>(kv.get_int("d", cfg.model.d));
  cfg.model.heads = static_cast<int>(kv.get_int("heads", cfg.model.heads));
  cfg.model.layers = static_cast<int>(kv.get_int("layers", cfg.model.layers));
  cfg.model.d_ff = static_cast<int>(kv.get_int("d_ff", cfg.model.d_ff));
  cfg.model.d_embed = static_cast<int>(kv.get_int("d_embed", cfg.model.d_embed));
  cfg.model.mlp_hidden = static_cast<int>(kv.get_int("mlp_hidden", cfg.model.mlp_hidden));
  cfg.model.shared_output_proj =
      kv.get_bool("shared_output_proj", cfg.model.shared_output_proj);
  cfg.model.readout =
      readout_mode_from_name(kv.get_str("readout", readout_mode_name(cfg.model.readout)));

  cfg.pipeline.sampler =
      sampler_kind_from_name(kv.get_str("sampler", sampler_kind_name(cfg.pipeline.sampler)));
  if (kv.has("budgets")) cfg.pipeline.budgets = parse_budget_list(kv.get_str("budgets", ""));
  cfg.pipeline.default_budget =
      static_cast<int>(kv.get_int("default_budget", cfg.pipeline.default_budget));
  cfg.pipeline.max_hops = static_cast<int>(kv.get_int("max_hops", cfg.pipeline.max_hops));
  cfg.pipeline.fanout = static_cast<int>(kv.get_int("fanout", cfg.pipeline.fanout));
  cfg.pipeline.depth = static_cast<int>(kv.get_int("depth", cfg.pipeline.depth));
  if (kv.has("metapaths"))
    cfg.pipeline.metapaths = parse_metapaths(kv.get_str("metapaths", ""));
  cfg.pipeline.walks_per_path =
      static_cast<int>(kv.get_int("walks_per_path", cfg.pipeline.walks_per_path));
  std::string sim = kv.get_str(
      "sim_mode", cfg.pipeline.sim_mode == SimilarityMode::Weighted ? "weighted" : "knn");
  if (sim == "weighted") {
    cfg.pipeline.sim_mode = SimilarityMode::Weighted;
  } else if (sim == "knn") {
    cfg.pipeline.sim_mode = SimilarityMode::Knn;
  } else {
    throw DataError("sim_mode must be weighted or knn, got '" + sim + "'");
  }
  cfg.pipeline.sim_k = static_cast<int>(kv.get_int("sim_k", cfg.pipeline.sim_k));
  cfg.pipeline.strategy =
      strategy_from_name(kv.get_str("strategy", strategy_name(cfg.pipeline.strategy)));
  cfg.pipeline.k_ts = kv.get_int("k_ts", cfg.pipeline.k_ts);
  cfg.pipeline.user_type = kv.get_str("user_type", cfg.pipeline.user_type);
  cfg.pipeline.item_type = kv.get_str("item_type", cfg.pipeline.item_type);

  if (kv.has("masks")) cfg.active_masks = parse_mask_list(kv.get_str("masks", ""));
  cfg.lr = kv.get_double("lr", cfg.lr);
  cfg.batch_size = static_cast<int>(kv.get_int("batch_size", cfg.batch_size));
  cfg.epochs = static_cast<int>(kv.get_int("epochs", cfg.epochs));
  cfg.resamples = static_cast<int>(kv.get_int("resamples", cfg.resamples));
  cfg.gamma = kv.get_double("gamma", cfg.gamma);
  cfg.optimizer =
      optimizer_kind_from_name(kv.get_str("optimizer", optimizer_kind_name(cfg.optimizer)));
  cfg.beta1 = kv.get_double("beta1", cfg.beta1);
  cfg.beta2 = kv.get_double("beta2", cfg.beta2);
  cfg.adam_eps = kv.get_double("adam_eps", cfg.adam_eps);
  cfg.cr_norm = cr_norm_from_name(kv.get_str("cr_norm", cr_norm_name(cfg.cr_norm)));
  cfg.cr_enabled = kv.get_bool("cr_enabled", cfg.cr_enabled);
  cfg.resample_mode =
      resample_mode_from_name(kv.get_str("resample_mode", resample_mode_name(cfg.resample_mode)));
  cfg.seed = kv.get_u64("seed", cfg.seed);
  cfg.workers = static_cast<int>(kv.get_int("workers", cfg.workers));

  auto unused = kv.unused_keys();
  if (!unused.empty()) {
    std::string msg = "unknown config keys:";
    for (const auto& k : unused) msg += " '" + k + "'";
    throw DataError(msg);
  }
  return cfg;
}

}  // namespace hinctr
