#include "hinctr/instances.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace hinctr {

std::vector<Instance> load_instances(const std::string& path, const HinGraph& g) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open instance file '" + path + "'");
  std::vector<Instance> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    bool blank = true;
    for (char c : line)
      if (!isspace(static_cast<unsigned char>(c))) {
        blank = false;
        break;
      }
    if (blank || line[0] == '#') continue;
    std::istringstream is(line);
    std::string user, item, label_s, ctx;
    if (!std::getline(is, user, '\t') || !std::getline(is, item, '\t') ||
        !std::getline(is, label_s, '\t')) {
      throw DataError(path + ":" + std::to_string(lineno) +
                      ": expected user<TAB>item<TAB>label[<TAB>context]");
    }
    std::getline(is, ctx, '\t');
    Instance inst;
    inst.user = g.find_node(user);
    if (inst.user < 0)
      throw DataError(path + ":" + std::to_string(lineno) + ": unknown user '" + user + "'");
    inst.item = g.find_node(item);
    if (inst.item < 0)
      throw DataError(path + ":" + std::to_string(lineno) + ": unknown item '" + item + "'");
    if (label_s == "0") {
      inst.label = 0;
    } else if (label_s == "1") {
      inst.label = 1;
    } else {
      throw DataError(path + ":" + std::to_string(lineno) + ": label must be 0 or 1, got '" +
                      label_s + "'");
    }
    if (!ctx.empty()) {
      std::istringstream cs(ctx);
      std::string tok;
      while (std::getline(cs, tok, ',')) {
        try {
          inst.context.push_back(std::stod(tok));
        } catch (const std::exception&) {
          throw DataError(path + ":" + std::to_string(lineno) + ": bad context value '" + tok + "'");
        }
      }
    }
    out.push_back(std::move(inst));
  }
  return out;
}

void save_instances(const std::string& path, const HinGraph& g,
                    const std::vector<Instance>& instances) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write instance file '" + path + "'");
  char buf[40];
  for (const auto& inst : instances) {
    out << g.node_name(inst.user) << '\t' << g.node_name(inst.item) << '\t' << inst.label;
    if (!inst.context.empty()) {
      out << '\t';
      for (size_t i = 0; i < inst.context.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%.17g", inst.context[i]);
        out << (i ? "," : "") << buf;
      }
    }
    out << '\n';
  }
}

int context_width(const std::vector<Instance>& instances) {
  if (instances.empty()) return 0;
  size_t w = instances[0].context.size();
  for (const auto& inst : instances)
    if (inst.context.size() != w)
      throw DataError("instances disagree on context width");
  return static_cast<int>(w);
}

}  // namespace hinctr
