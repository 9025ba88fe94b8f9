// Python bindings for the main operations: graph loading, neighbourhood
// sampling, mask construction, training, evaluation and the synthetic
// generator. Heavy lifting stays in the C++ core; values cross the boundary
// as plain lists/dicts so the module has no numpy dependency.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "hinctr/checkpoint.hpp"
#include "hinctr/config_file.hpp"
#include "hinctr/metrics.hpp"
#include "hinctr/synth.hpp"

namespace py = pybind11;
using namespace hinctr;

namespace {

TrainConfig config_from_dict(const std::map<std::string, std::string>& options) {
  KvConfig kv = KvConfig::parse_text("", "<options>");
  for (const auto& [k, v] : options) kv.set(k, v);
  return train_config_from(kv);
}

std::vector<std::vector<double>> mask_rows(const Mask& m) {
  std::vector<std::vector<double>> rows(m.n, std::vector<double>(m.n));
  for (int i = 0; i < m.n; ++i)
    for (int j = 0; j < m.n; ++j) rows[i][j] = m.at(i, j);
  return rows;
}

py::dict neighbourhood_dict(const HinGraph& g, const Neighbourhood& nb) {
  py::list names, types, hops, sides;
  for (int i = 0; i < nb.size(); ++i) {
    names.append(g.node_name(nb.nodes[i]));
    types.append(g.schema().type_name(g.type_of(nb.nodes[i])));
    hops.append(nb.hops[i]);
    sides.append(nb.sides[i] == Side::U ? "U" : nb.sides[i] == Side::V ? "V" : "both");
  }
  py::dict d;
  d["nodes"] = names;
  d["types"] = types;
  d["hops"] = hops;
  d["sides"] = sides;
  return d;
}

}  // namespace

PYBIND11_MODULE(_hinctr, m) {
  m.doc() = "neighbour-interaction CTR prediction on heterogeneous graphs";

  py::register_exception<DataError>(m, "DataError");
  py::register_exception<NumericError>(m, "NumericError");

  py::class_<HinGraph>(m, "Graph")
      .def_property_readonly("node_count", &HinGraph::node_count)
      .def_property_readonly("edge_count", &HinGraph::edge_count)
      .def("type_of",
           [](const HinGraph& g, const std::string& name) {
             return g.schema().type_name(g.type_of(g.node_id(name)));
           })
      .def("neighbors", [](const HinGraph& g, const std::string& name) {
        std::vector<std::string> out;
        for (int n : g.neighbors(g.node_id(name))) out.push_back(g.node_name(n));
        return out;
      });

  m.def(
      "load_graph",
      [](const std::string& nodes, const std::string& edges, const std::string& schema) {
        return HinGraph::load(nodes, edges, FeatureSchema::load(schema));
      },
      py::arg("nodes"), py::arg("edges"), py::arg("schema"));

  m.def(
      "synth",
      [](const std::string& out_dir, const std::map<std::string, std::string>& options) {
        SynthConfig cfg;
        KvConfig kv = KvConfig::parse_text("", "<options>");
        for (const auto& [k, v] : options) kv.set(k, v);
        cfg.users = static_cast<int>(kv.get_int("users", cfg.users));
        cfg.items = static_cast<int>(kv.get_int("items", cfg.items));
        cfg.publishers = static_cast<int>(kv.get_int("publishers", cfg.publishers));
        cfg.articles = static_cast<int>(kv.get_int("articles", cfg.articles));
        cfg.tag_space = static_cast<int>(kv.get_int("tag_space", cfg.tag_space));
        cfg.tags_per_node = static_cast<int>(kv.get_int("tags_per_node", cfg.tags_per_node));
        cfg.communities = static_cast<int>(kv.get_int("communities", cfg.communities));
        cfg.in_community = kv.get_double("in_community", cfg.in_community);
        cfg.noise = kv.get_double("noise", cfg.noise);
        cfg.positive_rate = kv.get_double("positive_rate", cfg.positive_rate);
        cfg.train_instances =
            static_cast<int>(kv.get_int("train_instances", cfg.train_instances));
        cfg.test_instances =
            static_cast<int>(kv.get_int("test_instances", cfg.test_instances));
        cfg.seed = kv.get_u64("seed", cfg.seed);
        auto unused = kv.unused_keys();
        if (!unused.empty()) throw DataError("unknown synth option '" + unused[0] + "'");
        synth(cfg, SynthPaths::in_dir(out_dir));
      },
      py::arg("out_dir"), py::arg("options") = std::map<std::string, std::string>{});

  m.def(
      "sample",
      [](const HinGraph& g, const std::string& target,
         const std::map<std::string, std::string>& options, uint64_t seed) {
        TrainConfig cfg = config_from_dict(options);
        std::vector<std::pair<std::string, int>> out;
        for (const auto& sn : run_sampler(g, g.node_id(target), cfg.pipeline, seed))
          out.emplace_back(g.node_name(sn.node), sn.hop);
        return out;
      },
      py::arg("graph"), py::arg("target"),
      py::arg("options") = std::map<std::string, std::string>{}, py::arg("seed") = 1);

  m.def(
      "sample_pair",
      [](const HinGraph& g, const std::string& u, const std::string& v,
         const std::map<std::string, std::string>& options, uint64_t seed) {
        TrainConfig cfg = config_from_dict(options);
        Neighbourhood nb = sample_pair(g, g.node_id(u), g.node_id(v), cfg.pipeline, seed);
        return neighbourhood_dict(g, nb);
      },
      py::arg("graph"), py::arg("u"), py::arg("v"),
      py::arg("options") = std::map<std::string, std::string>{}, py::arg("seed") = 1);

  m.def(
      "build_masks",
      [](const HinGraph& g, const std::string& u, const std::string& v,
         const std::map<std::string, std::string>& options, uint64_t seed) {
        TrainConfig cfg = config_from_dict(options);
        Neighbourhood nb = sample_pair(g, g.node_id(u), g.node_id(v), cfg.pipeline, seed);
        FeaturePartition part =
            partition_feature_groups(g.schema(), cfg.pipeline.strategy, cfg.pipeline.k_ts);
        MaskSet ms = masks_for(g, nb, part, cfg.pipeline, seed);
        py::dict d = neighbourhood_dict(g, nb);
        d["IG"] = mask_rows(ms.induced);
        d["SG"] = mask_rows(ms.similarity);
        d["CG"] = mask_rows(ms.cross);
        d["PG"] = mask_rows(ms.complete);
        return d;
      },
      py::arg("graph"), py::arg("u"), py::arg("v"),
      py::arg("options") = std::map<std::string, std::string>{}, py::arg("seed") = 1);

  m.def(
      "train",
      [](const HinGraph& g, const std::string& train_path, const std::string& valid_path,
         const std::map<std::string, std::string>& options, const std::string& out_path) {
        TrainConfig cfg = config_from_dict(options);
        auto train_set = load_instances(train_path, g);
        std::vector<Instance> valid_set;
        if (!valid_path.empty()) valid_set = load_instances(valid_path, g);
        cfg.model.context_dim = context_width(train_set);
        ModelParams params = init_model(g.schema(), cfg);
        FitResult result =
            fit(g, train_set, valid_set.empty() ? nullptr : &valid_set, cfg, params);
        if (!out_path.empty()) save_checkpoint(out_path, params, cfg.pipeline);
        py::list epochs;
        for (const auto& s : result.epochs) {
          py::dict e;
          e["epoch"] = s.epoch;
          e["loss"] = s.loss;
          e["bce"] = s.bce;
          e["cr"] = s.cr;
          if (s.has_auc) e["auc"] = s.auc;
          epochs.append(e);
        }
        return epochs;
      },
      py::arg("graph"), py::arg("train"), py::arg("valid") = std::string(),
      py::arg("options") = std::map<std::string, std::string>{},
      py::arg("out") = std::string());

  m.def(
      "evaluate",
      [](const HinGraph& g, const std::string& checkpoint, const std::string& test_path,
         uint64_t seed) {
        CheckpointData ckpt = load_checkpoint(checkpoint, g.schema());
        auto test_set = load_instances(test_path, g);
        auto scores = score_instances(g, test_set, ckpt.params, ckpt.pipeline, seed);
        std::vector<int> labels;
        for (const auto& inst : test_set) labels.push_back(inst.label);
        EvalReport r = evaluate_scores(scores, labels);
        py::dict d;
        d["count"] = r.count;
        d["positives"] = r.positives;
        if (r.has_auc) d["auc"] = r.auc;
        d["logloss"] = r.logloss;
        return d;
      },
      py::arg("graph"), py::arg("checkpoint"), py::arg("test"), py::arg("seed") = 9000);

  m.def("auc", &auc, py::arg("scores"), py::arg("labels"));
  m.def("logloss", &logloss, py::arg("scores"), py::arg("labels"));
}
