#pragma once
// Training / evaluation records: one (user, item, label, context) row per
// line, tab separated, context as comma-separated floats in an optional
// fourth column. '#' starts a comment.

#include <string>
#include <vector>

#include "hinctr/graph.hpp"

namespace hinctr {

struct Instance {
  int user = 0;   // dense node id
  int item = 0;
  int label = 0;  // 0 or 1
  std::vector<double> context;
};

std::vector<Instance> load_instances(const std::string& path, const HinGraph& g);
void save_instances(const std::string& path, const HinGraph& g,
                    const std::vector<Instance>& instances);

// All instances must agree on the context width; returns it.
int context_width(const std::vector<Instance>& instances);

}  // namespace hinctr
