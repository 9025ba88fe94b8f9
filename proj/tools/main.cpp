// Command-line front end: synth, build-graph, sample, train, eval, ablate.
// Exit codes: 0 success, 1 usage error, 2 data error, 3 numeric failure.

#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "hinctr/checkpoint.hpp"
#include "hinctr/config_file.hpp"
#include "hinctr/metrics.hpp"
#include "hinctr/synth.hpp"

namespace {

using namespace hinctr;

struct GraphArgs {
  std::string dir;
  std::string nodes, edges, schema;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--graph", dir, "directory holding nodes.tsv / edges.tsv / schema.txt");
    cmd->add_option("--nodes", nodes, "node file (overrides --graph)");
    cmd->add_option("--edges", edges, "edge file (overrides --graph)");
    cmd->add_option("--schema", schema, "schema file (overrides --graph)");
  }

  HinGraph load(LoadStats* stats = nullptr) const {
    std::string n = nodes, e = edges, s = schema;
    if (!dir.empty()) {
      if (n.empty()) n = dir + "/nodes.tsv";
      if (e.empty()) e = dir + "/edges.tsv";
      if (s.empty()) s = dir + "/schema.txt";
    }
    if (n.empty() || e.empty() || s.empty())
      throw UsageError("need --graph DIR or all of --nodes/--edges/--schema");
    return HinGraph::load(n, e, FeatureSchema::load(s), stats);
  }
};

std::vector<uint64_t> parse_seed_list(const std::string& text) {
  std::vector<uint64_t> out;
  std::istringstream is(text);
  std::string tok;
  while (std::getline(is, tok, ','))
    if (!tok.empty()) out.push_back(std::stoull(tok));
  if (out.empty()) throw UsageError("empty seed list");
  return out;
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::istringstream is(text);
  std::string tok;
  while (std::getline(is, tok, sep))
    if (!tok.empty()) out.push_back(tok);
  return out;
}

void write_or_print(const std::string& text, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(out_path);
  if (!out) throw DataError("cannot write '" + out_path + "'");
  out << text;
}

TrainConfig build_train_config(const std::string& config_path,
                               const std::vector<std::string>& overrides) {
  KvConfig kv = config_path.empty() ? KvConfig::parse_text("", "<defaults>")
                                    : KvConfig::load(config_path);
  for (const auto& kvpair : overrides) {
    auto eq = kvpair.find('=');
    if (eq == std::string::npos)
      throw UsageError("--set expects key=value, got '" + kvpair + "'");
    kv.set(kvpair.substr(0, eq), kvpair.substr(eq + 1));
  }
  return train_config_from(kv);
}

void print_epoch(const EpochStats& s) {
  char line[256];
  if (s.has_auc) {
    std::snprintf(line, sizeof(line),
                  "epoch=%d loss=%.6f bce=%.6f cr=%.6f auc=%.6f time_s=%.2f", s.epoch,
                  s.loss, s.bce, s.cr, s.auc, s.seconds);
  } else {
    std::snprintf(line, sizeof(line), "epoch=%d loss=%.6f bce=%.6f cr=%.6f time_s=%.2f",
                  s.epoch, s.loss, s.bce, s.cr, s.seconds);
  }
  std::cout << line << std::endl;
}

int cmd_synth(const SynthConfig& cfg, const std::string& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw DataError("cannot create directory '" + out_dir + "': " + ec.message());
  synth(cfg, SynthPaths::in_dir(out_dir));
  std::cout << "wrote " << out_dir << "/{nodes.tsv,edges.tsv,schema.txt,train.tsv,test.tsv}"
            << std::endl;
  return 0;
}

int cmd_build_graph(const GraphArgs& args, const std::string& out_nodes,
                    const std::string& out_edges) {
  LoadStats stats;
  HinGraph g = args.load(&stats);
  std::cout << "nodes\t" << g.node_count() << "\n";
  for (int t = 0; t < g.schema().type_count(); ++t)
    std::cout << "nodes[" << g.schema().type_name(t) << "]\t" << stats.nodes_per_type[t]
              << "\n";
  std::cout << "edges\t" << g.edge_count() << "\n";
  for (const auto& [pair, count] : stats.edges_per_type)
    std::cout << "edges[" << g.schema().type_name(pair.first) << "-"
              << g.schema().type_name(pair.second) << "]\t" << count << "\n";
  std::cout << "duplicate_edges_dropped\t" << stats.duplicate_edges << "\n";
  std::cout << "self_loops_dropped\t" << stats.self_loops << "\n";
  if (!out_nodes.empty() != !out_edges.empty())
    throw UsageError("--out-nodes and --out-edges must be given together");
  if (!out_nodes.empty()) g.save(out_nodes, out_edges);
  return 0;
}

int cmd_sample(const GraphArgs& args, const TrainConfig& cfg, const std::string& target,
               const std::string& target_v, uint64_t seed, bool emit_masks) {
  HinGraph g = args.load();
  cfg.pipeline.validate();
  if (emit_masks && target_v.empty())
    throw UsageError("--emit-masks needs a pair: --target and --target-v");

  if (target_v.empty()) {
    auto set = run_sampler(g, g.node_id(target), cfg.pipeline, seed);
    for (const auto& sn : set)
      std::cout << g.node_name(sn.node) << '\t' << g.schema().type_name(g.type_of(sn.node))
                << '\t' << sn.hop << "\n";
    return 0;
  }

  Neighbourhood nb =
      sample_pair(g, g.node_id(target), g.node_id(target_v), cfg.pipeline, seed);
  for (int i = 0; i < nb.size(); ++i) {
    const char* side = nb.sides[i] == Side::U ? "U" : nb.sides[i] == Side::V ? "V" : "both";
    std::cout << g.node_name(nb.nodes[i]) << '\t'
              << g.schema().type_name(g.type_of(nb.nodes[i])) << '\t' << nb.hops[i] << '\t'
              << side << "\n";
  }
  if (emit_masks) {
    FeaturePartition part =
        partition_feature_groups(g.schema(), cfg.pipeline.strategy, cfg.pipeline.k_ts);
    MaskSet masks = masks_for(g, nb, part, cfg.pipeline, seed);
    char buf[40];
    for (MaskKind kind : {MaskKind::Induced, MaskKind::Similarity, MaskKind::Cross,
                          MaskKind::Complete}) {
      const Mask& m = masks.by_kind(kind);
      std::cout << "# mask " << mask_kind_name(kind) << "\n";
      for (int i = 0; i < m.n; ++i) {
        for (int j = 0; j < m.n; ++j) {
          std::snprintf(buf, sizeof(buf), "%.6g", m.at(i, j));
          std::cout << (j ? " " : "") << buf;
        }
        std::cout << "\n";
      }
    }
  }
  return 0;
}

int cmd_train(const GraphArgs& args, TrainConfig cfg, const std::string& train_path,
              const std::string& valid_path, const std::string& out_path) {
  HinGraph g = args.load();
  auto train_set = load_instances(train_path, g);
  std::vector<Instance> valid_set;
  if (!valid_path.empty()) valid_set = load_instances(valid_path, g);
  cfg.model.context_dim = context_width(train_set);

  ModelParams params = init_model(g.schema(), cfg);
  FitResult result = fit(g, train_set, valid_set.empty() ? nullptr : &valid_set, cfg, params);
  for (const auto& s : result.epochs) print_epoch(s);
  if (!out_path.empty()) save_checkpoint(out_path, params, cfg.pipeline);
  return 0;
}

int cmd_eval(const GraphArgs& args, const std::string& ckpt_path,
             const std::string& test_path, const std::string& buckets_arg,
             const std::string& out_path, uint64_t seed) {
  HinGraph g = args.load();
  CheckpointData ckpt = load_checkpoint(ckpt_path, g.schema());
  auto test_set = load_instances(test_path, g);
  if (context_width(test_set) != ckpt.params.config().context_dim)
    throw DataError("test instances disagree with checkpoint context width");

  auto scores = score_instances(g, test_set, ckpt.params, ckpt.pipeline, seed);
  std::vector<int> labels;
  labels.reserve(test_set.size());
  for (const auto& inst : test_set) labels.push_back(inst.label);

  EvalReport report;
  if (buckets_arg.empty()) {
    report = evaluate_scores(scores, labels);
  } else {
    std::vector<long long> bounds;
    for (const auto& b : split(buckets_arg, ',')) bounds.push_back(std::stoll(b));
    auto histories =
        history_counts(g, test_set, g.schema().type_id(ckpt.pipeline.item_type));
    report = cold_start_report(scores, labels, histories, bounds);
  }
  std::string tsv = report_to_tsv(report);
  std::cout << tsv;
  if (!out_path.empty()) write_or_print(tsv, out_path);
  return 0;
}

int cmd_ablate(const GraphArgs& args, const TrainConfig& base, const std::string& train_path,
               const std::string& test_path, const std::string& subsets_arg,
               const std::string& samplers_arg, const std::string& budgets_arg,
               const std::string& sims_arg, const std::string& strategies_arg,
               const std::string& seeds_arg, const std::string& out_path) {
  HinGraph g = args.load();
  auto train_set = load_instances(train_path, g);
  auto test_set = load_instances(test_path, g);

  TrainConfig cfg = base;
  cfg.model.context_dim = context_width(train_set);
  auto seeds = parse_seed_list(seeds_arg);

  std::vector<std::pair<std::string, TrainConfig>> variants;
  for (const auto& subset : split(subsets_arg, ';')) {
    TrainConfig v = cfg;
    v.active_masks = parse_mask_list(subset);
    variants.emplace_back("masks=" + subset, v);
  }
  for (const auto& name : split(samplers_arg, ';')) {
    TrainConfig v = cfg;
    v.pipeline.sampler = sampler_kind_from_name(name);
    variants.emplace_back("sampler=" + name, v);
  }
  for (const auto& b : split(budgets_arg, ';')) {
    TrainConfig v = cfg;
    v.pipeline.budgets.clear();
    v.pipeline.default_budget = std::stoi(b);
    variants.emplace_back("budget=" + b, v);
  }
  for (const auto& s : split(sims_arg, ';')) {
    TrainConfig v = cfg;
    if (s == "weighted") {
      v.pipeline.sim_mode = SimilarityMode::Weighted;
    } else if (s.rfind("knn:", 0) == 0) {
      v.pipeline.sim_mode = SimilarityMode::Knn;
      v.pipeline.sim_k = std::stoi(s.substr(4));
    } else {
      throw UsageError("similarity variant must be 'weighted' or 'knn:<k>', got '" + s + "'");
    }
    variants.emplace_back("sim=" + s, v);
  }
  for (const auto& s : split(strategies_arg, ';')) {
    TrainConfig v = cfg;
    auto colon = s.find(':');
    v.pipeline.strategy = strategy_from_name(s.substr(0, colon));
    if (colon != std::string::npos) v.pipeline.k_ts = std::stoll(s.substr(colon + 1));
    variants.emplace_back("strategy=" + s, v);
  }
  if (variants.empty())
    throw UsageError("ablate needs at least one variant axis (e.g. --subsets)");

  auto results = run_variants(g, train_set, test_set, variants, seeds);
  std::string tsv = variants_to_tsv(results);
  std::cout << tsv;
  if (!out_path.empty()) write_or_print(tsv, out_path);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"heterogeneous-graph CTR prediction with a masked transformer"};
  app.require_subcommand(1);

  // synth
  auto* synth_cmd = app.add_subcommand("synth", "generate a synthetic benchmark");
  SynthConfig synth_cfg;
  std::string synth_out;
  synth_cmd->add_option("--out", synth_out, "output directory")->required();
  synth_cmd->add_option("--seed", synth_cfg.seed, "master seed");
  synth_cmd->add_option("--users", synth_cfg.users, "user count");
  synth_cmd->add_option("--items", synth_cfg.items, "item count");
  synth_cmd->add_option("--publishers", synth_cfg.publishers, "publisher count");
  synth_cmd->add_option("--articles", synth_cfg.articles, "article count");
  synth_cmd->add_option("--tag-space", synth_cfg.tag_space, "tag vocabulary size");
  synth_cmd->add_option("--tags-per-node", synth_cfg.tags_per_node, "tags per node");
  synth_cmd->add_option("--communities", synth_cfg.communities, "community count");
  synth_cmd->add_option("--in-community", synth_cfg.in_community,
                        "probability edges/tags stay in-community");
  synth_cmd->add_option("--subs-per-user", synth_cfg.subs_per_user, "subscriptions per user");
  synth_cmd->add_option("--item-clicks", synth_cfg.item_clicks_per_user,
                        "item clicks per user");
  synth_cmd->add_option("--article-clicks", synth_cfg.article_clicks_per_user,
                        "article clicks per user");
  synth_cmd->add_option("--w-community", synth_cfg.w_community, "label weight: same community");
  synth_cmd->add_option("--w-tags", synth_cfg.w_tags, "label weight: tag cosine");
  synth_cmd->add_option("--w-publisher", synth_cfg.w_publisher,
                        "label weight: publisher connection");
  synth_cmd->add_option("--positive-rate", synth_cfg.positive_rate, "target positive share");
  synth_cmd->add_option("--noise", synth_cfg.noise, "label flip probability");
  synth_cmd->add_option("--train-instances", synth_cfg.train_instances, "training instances");
  synth_cmd->add_option("--test-instances", synth_cfg.test_instances, "test instances");

  // build-graph
  auto* build_cmd = app.add_subcommand("build-graph", "load, validate and report a graph");
  GraphArgs build_args;
  build_args.add_to(build_cmd);
  std::string out_nodes, out_edges;
  build_cmd->add_option("--out-nodes", out_nodes, "write the canonical node file");
  build_cmd->add_option("--out-edges", out_edges, "write the canonical edge file");

  // sample
  auto* sample_cmd = app.add_subcommand("sample", "sample a neighbourhood");
  GraphArgs sample_args;
  sample_args.add_to(sample_cmd);
  std::string sample_target, sample_target_v, sample_config;
  std::vector<std::string> sample_sets;
  uint64_t sample_seed = 1;
  bool emit_masks = false;
  sample_cmd->add_option("--target", sample_target, "target node id")->required();
  sample_cmd->add_option("--target-v", sample_target_v, "second target (pair mode)");
  sample_cmd->add_option("--seed", sample_seed, "sampler seed");
  sample_cmd->add_option("--config", sample_config, "config file");
  sample_cmd->add_option("--set", sample_sets, "override config key=value");
  sample_cmd->add_flag("--emit-masks", emit_masks, "dump the four masks (pair mode)");
  std::string sample_sampler, sample_budgets;
  sample_cmd->add_option("--sampler", sample_sampler, "ghn|nodewise|metapath");
  sample_cmd->add_option("--budgets", sample_budgets, "per-type budgets, type=count,...");

  // train
  auto* train_cmd = app.add_subcommand("train", "train a model");
  GraphArgs train_args;
  train_args.add_to(train_cmd);
  std::string train_path, valid_path, train_out, train_config;
  std::vector<std::string> train_sets;
  train_cmd->add_option("--train", train_path, "training instances")->required();
  train_cmd->add_option("--valid", valid_path, "validation instances");
  train_cmd->add_option("--config", train_config, "config file");
  train_cmd->add_option("--set", train_sets, "override config key=value");
  train_cmd->add_option("--out", train_out, "checkpoint output path");
  std::string train_seed;
  train_cmd->add_option("--seed", train_seed, "master seed (overrides config)");

  // eval
  auto* eval_cmd = app.add_subcommand("eval", "evaluate a checkpoint");
  GraphArgs eval_args;
  eval_args.add_to(eval_cmd);
  std::string eval_ckpt, eval_test, eval_buckets, eval_out;
  uint64_t eval_seed = 9000;
  eval_cmd->add_option("--checkpoint", eval_ckpt, "checkpoint path")->required();
  eval_cmd->add_option("--test", eval_test, "test instances")->required();
  eval_cmd->add_option("--buckets", eval_buckets,
                       "cold-start bucket bounds, e.g. 0,5,20");
  eval_cmd->add_option("--out", eval_out, "also write the report to a file");
  eval_cmd->add_option("--seed", eval_seed, "evaluation sampling seed");

  // ablate
  auto* ablate_cmd = app.add_subcommand("ablate", "train and compare variants");
  GraphArgs ablate_args;
  ablate_args.add_to(ablate_cmd);
  std::string ab_train, ab_test, ab_config, ab_subsets, ab_samplers, ab_budgets, ab_sims,
      ab_strategies, ab_out;
  std::string ab_seeds = "1,2,3";
  std::vector<std::string> ab_sets;
  ablate_cmd->add_option("--train", ab_train, "training instances")->required();
  ablate_cmd->add_option("--test", ab_test, "test instances")->required();
  ablate_cmd->add_option("--config", ab_config, "config file");
  ablate_cmd->add_option("--set", ab_sets, "override config key=value");
  ablate_cmd->add_option("--subsets", ab_subsets,
                         "mask subsets, e.g. 'IG,SG,CG,PG;IG;SG;CG;PG'");
  ablate_cmd->add_option("--samplers", ab_samplers, "sampler variants, e.g. 'ghn;nodewise'");
  ablate_cmd->add_option("--budget-sweep", ab_budgets, "per-type budget values, e.g. '4;8;16'");
  ablate_cmd->add_option("--sim-variants", ab_sims, "e.g. 'weighted;knn:1;knn:5'");
  ablate_cmd->add_option("--strategies", ab_strategies, "e.g. 'S1;S3:1000;S4:1000'");
  ablate_cmd->add_option("--seeds", ab_seeds, "comma-separated seeds");
  ablate_cmd->add_option("--out", ab_out, "also write the table to a file");

  try {
    try {
      app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
      return app.exit(e);
    } catch (const CLI::ParseError& e) {
      app.exit(e);
      return 1;
    }

    if (synth_cmd->parsed()) return cmd_synth(synth_cfg, synth_out);
    if (build_cmd->parsed()) return cmd_build_graph(build_args, out_nodes, out_edges);
    if (sample_cmd->parsed()) {
      auto sets = sample_sets;
      if (!sample_sampler.empty()) sets.push_back("sampler=" + sample_sampler);
      if (!sample_budgets.empty()) sets.push_back("budgets=" + sample_budgets);
      TrainConfig cfg = build_train_config(sample_config, sets);
      return cmd_sample(sample_args, cfg, sample_target, sample_target_v, sample_seed,
                        emit_masks);
    }
    if (train_cmd->parsed()) {
      auto sets = train_sets;
      if (!train_seed.empty()) sets.push_back("seed=" + train_seed);
      TrainConfig cfg = build_train_config(train_config, sets);
      return cmd_train(train_args, cfg, train_path, valid_path, train_out);
    }
    if (eval_cmd->parsed())
      return cmd_eval(eval_args, eval_ckpt, eval_test, eval_buckets, eval_out, eval_seed);
    if (ablate_cmd->parsed()) {
      TrainConfig cfg = build_train_config(ab_config, ab_sets);
      return cmd_ablate(ablate_args, cfg, ab_train, ab_test, ab_subsets, ab_samplers,
                        ab_budgets, ab_sims, ab_strategies, ab_seeds, ab_out);
    }
    throw UsageError("no subcommand given");
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << std::endl;
    return 1;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << std::endl;
    return 2;
  } catch (const NumericError& e) {
    std::cerr << "numeric error: " << e.what() << std::endl;
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return 2;
  }
  return 0;
}
