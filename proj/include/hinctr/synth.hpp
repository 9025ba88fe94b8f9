#pragma once
// Synthetic benchmark generator: a four-type graph (user, item, publisher,
// article) with community-structured edges and community-biased tag
// features, plus labelled (user, item) instances whose labels derive from
// the planted structure: same community, tag cosine, and whether the user
// is connected to the item's publisher. Output files use the standard
// node/edge/schema/instance formats and are byte-identical per seed.

#include <cstdint>
#include <string>

#include "hinctr/errors.hpp"

namespace hinctr {

struct SynthConfig {
  int users = 500;
  int items = 300;
  int publishers = 30;
  int articles = 300;
  int tag_space = 200;
  int tags_per_node = 5;
  int communities = 10;
  double in_community = 0.8;  // probability an edge or tag stays in-community
  int subs_per_user = 3;
  int item_clicks_per_user = 6;
  int article_clicks_per_user = 6;
  // label score = w_community * [same community] + w_tags * tag_cosine(u, v)
  //             + w_publisher * [u connected to v's publisher] + bias
  double w_community = 1.0;
  double w_tags = 2.0;
  double w_publisher = 1.0;
  double positive_rate = 0.25;  // bias set so roughly this share is positive
  double noise = 0.0;           // independent label flip probability
  int train_instances = 4000;
  int test_instances = 1000;
  uint64_t seed = 1;

  void validate() const;
};

struct SynthPaths {
  std::string nodes, edges, schema, train, test;

  static SynthPaths in_dir(const std::string& dir);
};

void synth(const SynthConfig& cfg, const SynthPaths& paths);

}  // namespace hinctr
