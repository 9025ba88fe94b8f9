#include "hinctr/schema.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace hinctr {

namespace {

std::vector<std::string> split_ws(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream is(line);
  std::string tok;
  while (is >> tok) out.push_back(tok);
  return out;
}

}  // namespace

int FeatureSchema::add_type(const std::string& name) {
  if (find_type(name) >= 0) throw DataError("duplicate node type '" + name + "'");
  type_names_.push_back(name);
  groups_.emplace_back();
  return static_cast<int>(type_names_.size()) - 1;
}

void FeatureSchema::add_group(int type, const std::string& name, int dim,
                              EncodingKind kind) {
  if (dim < 1) throw DataError("group '" + name + "' has dimension " + std::to_string(dim) + ", must be >= 1");
  if (find_group(type, name) >= 0)
    throw DataError("duplicate group '" + name + "' on type '" + type_name(type) + "'");
  groups_.at(type).push_back(FeatureGroup{name, dim, kind});
}

void FeatureSchema::add_shared(int type_a, int group_a, int type_b, int group_b) {
  if (type_a == type_b)
    throw DataError("self sharing is implicit and must not be declared");
  int ta = type_a, tb = type_b, ga = group_a, gb = group_b;
  if (ta > tb) {
    std::swap(ta, tb);
    std::swap(ga, gb);
  }
  if (group(ta, ga).dim != group(tb, gb).dim)
    throw DataError("shared groups '" + group(ta, ga).name + "' and '" +
                    group(tb, gb).name + "' have different dimensions");
  for (auto& e : shared_) {
    if (e.ta == ta && e.tb == tb) {
      e.ga.push_back(ga);
      e.gb.push_back(gb);
      return;
    }
  }
  SharedEntry e;
  e.ta = ta;
  e.tb = tb;
  e.ga.push_back(ga);
  e.gb.push_back(gb);
  shared_.push_back(std::move(e));
}

int FeatureSchema::type_id(const std::string& name) const {
  int t = find_type(name);
  if (t < 0) throw DataError("unknown node type '" + name + "'");
  return t;
}

int FeatureSchema::find_type(const std::string& name) const {
  for (int i = 0; i < type_count(); ++i)
    if (type_names_[i] == name) return i;
  return -1;
}

int FeatureSchema::find_group(int t, const std::string& name) const {
  const auto& gs = groups_.at(t);
  for (int i = 0; i < static_cast<int>(gs.size()); ++i)
    if (gs[i].name == name) return i;
  return -1;
}

std::pair<std::vector<int>, std::vector<int>> FeatureSchema::shared_groups(
    int t_a, int t_b) const {
  if (t_a < 0 || t_a >= type_count() || t_b < 0 || t_b >= type_count())
    throw DataError("shared_groups: unknown type id");
  std::pair<std::vector<int>, std::vector<int>> out;
  if (t_a == t_b) {
    for (int g = 0; g < group_count(t_a); ++g) {
      out.first.push_back(g);
      out.second.push_back(g);
    }
    return out;
  }
  for (const auto& e : shared_) {
    if (e.ta == std::min(t_a, t_b) && e.tb == std::max(t_a, t_b)) {
      if (t_a < t_b) {
        out = {e.ga, e.gb};
      } else {
        out = {e.gb, e.ga};
      }
      return out;
    }
  }
  return out;  // nothing shared
}

void FeatureSchema::validate() const {
  if (type_count() == 0) throw DataError("schema declares no node types");
  for (int t = 0; t < type_count(); ++t) {
    for (const auto& g : groups_[t])
      if (g.dim < 1) throw DataError("group '" + g.name + "' has dimension < 1");
  }
  for (const auto& e : shared_) {
    if (e.ga.size() != e.gb.size())
      throw DataError("unaligned shared-group lists");
    for (size_t i = 0; i < e.ga.size(); ++i) {
      if (group(e.ta, e.ga[i]).dim != group(e.tb, e.gb[i]).dim)
        throw DataError("shared groups with unequal dimensions between '" +
                        type_name(e.ta) + "' and '" + type_name(e.tb) + "'");
    }
  }
}

uint64_t FeatureSchema::fingerprint() const {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : to_text()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string FeatureSchema::to_text() const {
  std::ostringstream os;
  for (const auto& t : type_names_) os << "type " << t << "\n";
  for (int t = 0; t < type_count(); ++t) {
    for (const auto& g : groups_[t]) {
      os << "group " << type_name(t) << " " << g.name << " " << g.dim << " "
         << (g.kind == EncodingKind::OneHot ? "one_hot" : "multi_hot") << "\n";
    }
  }
  for (const auto& e : shared_) {
    os << "shared " << type_name(e.ta) << " " << type_name(e.tb) << " ";
    for (size_t i = 0; i < e.ga.size(); ++i) {
      if (i) os << ",";
      os << group(e.ta, e.ga[i]).name << ":" << group(e.tb, e.gb[i]).name;
    }
    os << "\n";
  }
  return os.str();
}

FeatureSchema FeatureSchema::parse_text(const std::string& text,
                                        const std::string& origin) {
  FeatureSchema s;
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  auto fail = [&](const std::string& msg) {
    throw DataError(origin + ":" + std::to_string(lineno) + ": " + msg);
  };
  while (std::getline(is, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    auto toks = split_ws(line);
    if (toks.empty()) continue;
    try {
      if (toks[0] == "type") {
        if (toks.size() != 2) fail("expected: type <name>");
        s.add_type(toks[1]);
      } else if (toks[0] == "group") {
        if (toks.size() != 5) fail("expected: group <type> <name> <dim> <one_hot|multi_hot>");
        int t = s.type_id(toks[1]);
        int dim = 0;
        try {
          dim = std::stoi(toks[3]);
        } catch (const std::exception&) {
          fail("bad dimension '" + toks[3] + "'");
        }
        EncodingKind kind;
        if (toks[4] == "one_hot") {
          kind = EncodingKind::OneHot;
        } else if (toks[4] == "multi_hot") {
          kind = EncodingKind::MultiHot;
        } else {
          fail("bad encoding kind '" + toks[4] + "'");
          return s;  // unreachable
        }
        s.add_group(t, toks[2], dim, kind);
      } else if (toks[0] == "shared") {
        if (toks.size() != 4) fail("expected: shared <type_a> <type_b> <a_group:b_group,...>");
        int ta = s.type_id(toks[1]);
        int tb = s.type_id(toks[2]);
        std::istringstream ps(toks[3]);
        std::string pair;
        while (std::getline(ps, pair, ',')) {
          auto colon = pair.find(':');
          if (colon == std::string::npos) fail("expected <a_group>:<b_group> in '" + pair + "'");
          int ga = s.find_group(ta, pair.substr(0, colon));
          int gb = s.find_group(tb, pair.substr(colon + 1));
          if (ga < 0) fail("unknown group '" + pair.substr(0, colon) + "' on type '" + toks[1] + "'");
          if (gb < 0) fail("unknown group '" + pair.substr(colon + 1) + "' on type '" + toks[2] + "'");
          s.add_shared(ta, ga, tb, gb);
        }
      } else {
        fail("unknown directive '" + toks[0] + "'");
      }
    } catch (const DataError& e) {
      // add_* throw without location info; re-tag with the line
      std::string msg = e.what();
      if (msg.rfind(origin, 0) == 0) throw;
      fail(msg);
    }
  }
  s.validate();
  return s;
}

FeatureSchema FeatureSchema::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open schema file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_text(buf.str(), path);
}

void FeatureSchema::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write schema file '" + path + "'");
  out << to_text();
}

}  // namespace hinctr
