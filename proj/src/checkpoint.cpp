#include "hinctr/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>

namespace hinctr {

static_assert(std::endian::native == std::endian::little,
              "checkpoint writer assumes a little-endian host");

namespace {

constexpr char kMagic[8] = {'H', 'I', 'N', 'C', 'T', 'R', 'C', 'K'};
constexpr uint32_t kVersion = 1;

struct Writer {
  std::ofstream out;
  explicit Writer(const std::string& path) : out(path, std::ios::binary) {
    if (!out) throw DataError("cannot write checkpoint '" + path + "'");
  }
  void bytes(const void* p, size_t n) { out.write(static_cast<const char*>(p), n); }
  void u8(uint8_t v) { bytes(&v, 1); }
  void u32(uint32_t v) { bytes(&v, 4); }
  void i32(int32_t v) { bytes(&v, 4); }
  void u64(uint64_t v) { bytes(&v, 8); }
  void i64(int64_t v) { bytes(&v, 8); }
  void f64(double v) { bytes(&v, 8); }
  void str(const std::string& s) {
    u32(static_cast<uint32_t>(s.size()));
    bytes(s.data(), s.size());
  }
};

struct Reader {
  std::ifstream in;
  std::string path;
  explicit Reader(const std::string& p) : in(p, std::ios::binary), path(p) {
    if (!in) throw DataError("cannot open checkpoint '" + p + "'");
  }
  void bytes(void* p, size_t n) {
    in.read(static_cast<char*>(p), n);
    if (!in) throw DataError("truncated checkpoint '" + path + "'");
  }
  uint8_t u8() { uint8_t v; bytes(&v, 1); return v; }
  uint32_t u32() { uint32_t v; bytes(&v, 4); return v; }
  int32_t i32() { int32_t v; bytes(&v, 4); return v; }
  uint64_t u64() { uint64_t v; bytes(&v, 8); return v; }
  int64_t i64() { int64_t v; bytes(&v, 8); return v; }
  double f64() { double v; bytes(&v, 8); return v; }
  std::string str() {
    uint32_t n = u32();
    if (n > (1u << 20)) throw DataError("implausible string length in checkpoint");
    std::string s(n, '\0');
    if (n) bytes(s.data(), n);
    return s;
  }
};

void write_int_list(Writer& w, const std::vector<int>& v) {
  w.u32(static_cast<uint32_t>(v.size()));
  for (int x : v) w.i32(x);
}

std::vector<int> read_int_list(Reader& r) {
  uint32_t n = r.u32();
  std::vector<int> v(n);
  for (auto& x : v) x = r.i32();
  return v;
}

}  // namespace

void save_checkpoint(const std::string& path, ModelParams& params,
                     const PipelineConfig& pipeline) {
  Writer w(path);
  w.bytes(kMagic, sizeof(kMagic));
  w.u32(kVersion);
  w.u64(params.schema_fingerprint());

  const ModelConfig& mc = params.config();
  w.i32(mc.d);
  w.i32(mc.heads);
  w.i32(mc.layers);
  w.i32(mc.d_ff);
  w.i32(mc.d_embed);
  w.i32(mc.mlp_hidden);
  w.i32(mc.context_dim);
  w.u8(mc.shared_output_proj ? 1 : 0);
  w.u8(static_cast<uint8_t>(mc.readout));
  w.i32(mc.user_type);
  w.i32(mc.item_type);
  for (MaskKind k : mc.head_kinds) w.u8(static_cast<uint8_t>(k));

  const FeaturePartition& fp = params.partition();
  w.u8(static_cast<uint8_t>(fp.strategy));
  w.i64(fp.k_ts);
  w.u32(static_cast<uint32_t>(fp.node_input_groups.size()));
  for (size_t t = 0; t < fp.node_input_groups.size(); ++t) {
    write_int_list(w, fp.node_input_groups[t]);
    write_int_list(w, fp.similarity_groups[t]);
  }

  w.u8(static_cast<uint8_t>(pipeline.sampler));
  w.i32(pipeline.default_budget);
  w.i32(pipeline.max_hops);
  w.u32(static_cast<uint32_t>(pipeline.budgets.size()));
  for (const auto& [type, b] : pipeline.budgets) {
    w.str(type);
    w.i32(b);
  }
  w.i32(pipeline.fanout);
  w.i32(pipeline.depth);
  w.u32(static_cast<uint32_t>(pipeline.metapaths.size()));
  for (const auto& path : pipeline.metapaths) {
    w.u32(static_cast<uint32_t>(path.size()));
    for (const auto& t : path) w.str(t);
  }
  w.i32(pipeline.walks_per_path);
  w.u8(static_cast<uint8_t>(pipeline.sim_mode));
  w.i32(pipeline.sim_k);
  w.u8(static_cast<uint8_t>(pipeline.strategy));
  w.i64(pipeline.k_ts);
  w.str(pipeline.user_type);
  w.str(pipeline.item_type);

  auto ptrs = params.all();
  w.u32(static_cast<uint32_t>(ptrs.size()));
  for (const Parameter* p : ptrs) {
    w.str(p->name);
    w.u32(static_cast<uint32_t>(p->value.rank()));
    for (int i = 0; i < p->value.rank(); ++i) w.i32(p->value.dim(i));
    w.bytes(p->value.data(), p->value.size() * sizeof(double));
  }
  if (!w.out) throw DataError("failed writing checkpoint '" + path + "'");
}

CheckpointData load_checkpoint(const std::string& path, const FeatureSchema& schema) {
  Reader r(path);
  char magic[8];
  r.bytes(magic, sizeof(magic));
  if (std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw DataError("'" + path + "' is not a checkpoint file");
  uint32_t version = r.u32();
  if (version != kVersion)
    throw DataError("unsupported checkpoint version " + std::to_string(version));
  uint64_t fp = r.u64();
  if (fp != schema.fingerprint())
    throw DataError("checkpoint was trained against a different schema");

  ModelConfig mc;
  mc.d = r.i32();
  mc.heads = r.i32();
  mc.layers = r.i32();
  mc.d_ff = r.i32();
  mc.d_embed = r.i32();
  mc.mlp_hidden = r.i32();
  mc.context_dim = r.i32();
  mc.shared_output_proj = r.u8() != 0;
  mc.readout = static_cast<ReadoutMode>(r.u8());
  mc.user_type = r.i32();
  mc.item_type = r.i32();
  mc.head_kinds.resize(mc.heads);
  for (auto& k : mc.head_kinds) k = static_cast<MaskKind>(r.u8());

  FeaturePartition part;
  part.strategy = static_cast<Strategy>(r.u8());
  part.k_ts = r.i64();
  uint32_t types = r.u32();
  if (static_cast<int>(types) != schema.type_count())
    throw DataError("checkpoint type count does not match schema");
  part.node_input_groups.resize(types);
  part.similarity_groups.resize(types);
  for (uint32_t t = 0; t < types; ++t) {
    part.node_input_groups[t] = read_int_list(r);
    part.similarity_groups[t] = read_int_list(r);
  }

  PipelineConfig pc;
  pc.sampler = static_cast<SamplerKind>(r.u8());
  pc.default_budget = r.i32();
  pc.max_hops = r.i32();
  uint32_t nbudgets = r.u32();
  for (uint32_t i = 0; i < nbudgets; ++i) {
    std::string type = r.str();
    pc.budgets[type] = r.i32();
  }
  pc.fanout = r.i32();
  pc.depth = r.i32();
  uint32_t npaths = r.u32();
  pc.metapaths.resize(npaths);
  for (auto& path : pc.metapaths) {
    uint32_t len = r.u32();
    path.resize(len);
    for (auto& t : path) t = r.str();
  }
  pc.walks_per_path = r.i32();
  pc.sim_mode = static_cast<SimilarityMode>(r.u8());
  pc.sim_k = r.i32();
  pc.strategy = static_cast<Strategy>(r.u8());
  pc.k_ts = r.i64();
  pc.user_type = r.str();
  pc.item_type = r.str();

  CheckpointData data;
  data.pipeline = pc;
  data.params = ModelParams(schema, part, mc, /*init_seed=*/0);

  uint32_t count = r.u32();
  auto ptrs = data.params.all();
  if (count != ptrs.size())
    throw DataError("checkpoint parameter count mismatch");
  for (Parameter* p : ptrs) {
    std::string name = r.str();
    if (name != p->name)
      throw DataError("checkpoint blob '" + name + "' does not match expected '" + p->name + "'");
    uint32_t rank = r.u32();
    if (static_cast<int>(rank) != p->value.rank())
      throw DataError("checkpoint blob '" + name + "' rank mismatch");
    for (int i = 0; i < p->value.rank(); ++i)
      if (r.i32() != p->value.dim(i))
        throw DataError("checkpoint blob '" + name + "' shape mismatch");
    r.bytes(p->value.data(), p->value.size() * sizeof(double));
  }
  return data;
}

}  // namespace hinctr
