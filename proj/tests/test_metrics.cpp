#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "hinctr/metrics.hpp"
#include "test_util.hpp"

using namespace hinctr;
using testutil::TempDir;

namespace {

// O(N^2) pairwise definition: positives outranking negatives, ties half.
double auc_bruteforce(const std::vector<double>& scores, const std::vector<int>& labels) {
  double wins = 0;
  long long pairs = 0;
  for (size_t i = 0; i < scores.size(); ++i) {
    if (labels[i] != 1) continue;
    for (size_t j = 0; j < scores.size(); ++j) {
      if (labels[j] != 0) continue;
      ++pairs;
      if (scores[i] > scores[j]) wins += 1.0;
      if (scores[i] == scores[j]) wins += 0.5;
    }
  }
  return wins / pairs;
}

}  // namespace

TEST_CASE("auc basics") {
  CHECK(auc({0.1, 0.2, 0.8, 0.9}, {0, 0, 1, 1}) == 1.0);
  CHECK(auc({0.9, 0.8, 0.2, 0.1}, {0, 0, 1, 1}) == 0.0);
  CHECK(auc({0.5, 0.5, 0.5, 0.5}, {0, 1, 0, 1}) == 0.5);
  CHECK_THROWS_AS(auc({0.1, 0.2}, {1, 1}), DataError);
  CHECK_THROWS_AS(auc({0.1, 0.2}, {0, 2}), DataError);
}

TEST_CASE("auc equals the pairwise oracle, ties included") {
  Rng rng(2025);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 5 + static_cast<int>(rng.below(40));
    std::vector<double> scores(n);
    std::vector<int> labels(n);
    for (int i = 0; i < n; ++i) {
      // coarse grid forces plenty of ties
      scores[i] = static_cast<double>(rng.below(8)) / 8.0;
      labels[i] = static_cast<int>(rng.below(2));
    }
    labels[0] = 1;
    labels[1] = 0;
    CHECK(std::abs(auc(scores, labels) - auc_bruteforce(scores, labels)) < 1e-12);
  }
}

TEST_CASE("auc invariances") {
  Rng rng(8);
  std::vector<double> scores(30);
  std::vector<int> labels(30);
  for (int i = 0; i < 30; ++i) {
    scores[i] = rng.next_double();
    labels[i] = static_cast<int>(rng.below(2));
  }
  labels[0] = 1;
  labels[1] = 0;
  double base = auc(scores, labels);

  SUBCASE("strictly monotone transforms preserve the value") {
    auto t1 = scores, t2 = scores;
    for (auto& s : t1) s = std::exp(3.0 * s);
    for (auto& s : t2) s = std::atan(s) - 5.0;
    CHECK(auc(t1, labels) == base);
    CHECK(auc(t2, labels) == base);
  }
  SUBCASE("negating scores flips the value when no ties exist") {
    auto neg = scores;
    for (auto& s : neg) s = -s;
    CHECK(auc(neg, labels) == doctest::Approx(1.0 - base).epsilon(1e-12));
  }
}

TEST_CASE("logloss") {
  CHECK(logloss({0.5, 0.5}, {0, 1}) ==
        doctest::Approx(0.693147180559945309).epsilon(1e-15));
  CHECK(logloss({1.0 - 1e-12, 1e-12}, {1, 0}) < 1e-11);
  CHECK_THROWS_AS(logloss({0.0, 0.5}, {0, 1}), DataError);
  CHECK_THROWS_AS(logloss({}, {}), DataError);

  // mixed fixture equals the mean of per-instance bce_loss
  std::vector<double> s{0.9, 0.2, 0.7, 0.4, 0.55};
  std::vector<int> y{1, 0, 0, 1, 1};
  double want = 0;
  for (int i = 0; i < 5; ++i) want += bce_loss(s[i], y[i]);
  want /= 5;
  CHECK(logloss(s, y) == doctest::Approx(want).epsilon(1e-15));
}

TEST_CASE("cold start buckets") {
  std::vector<double> scores;
  std::vector<int> labels;
  std::vector<long long> hist;
  Rng rng(12);
  for (int i = 0; i < 60; ++i) {
    double signal = rng.next_double();
    scores.push_back(signal);
    labels.push_back(signal > 0.6 ? 1 : (rng.next_double() < 0.2 ? 1 : 0));
    hist.push_back(static_cast<long long>(rng.below(10)));
  }

  SUBCASE("single catch-all bucket equals the global auc") {
    auto r = cold_start_report(scores, labels, hist, {});
    REQUIRE(r.buckets.size() == 1);
    CHECK(r.buckets[0].count == 60);
    CHECK(r.buckets[0].auc == doctest::Approx(r.auc).epsilon(1e-15));
  }

  SUBCASE("bucket AUCs match the filter-then-auc oracle") {
    auto r = cold_start_report(scores, labels, hist, {0, 3});
    REQUIRE(r.buckets.size() == 3);
    CHECK(r.buckets[0].key == "0");
    CHECK(r.buckets[1].key == "1-3");
    CHECK(r.buckets[2].key == ">3");
    for (int b = 0; b < 3; ++b) {
      std::vector<double> fs;
      std::vector<int> fy;
      for (int i = 0; i < 60; ++i) {
        bool in = b == 0 ? hist[i] == 0 : b == 1 ? (hist[i] >= 1 && hist[i] <= 3)
                                                 : hist[i] > 3;
        if (in) {
          fs.push_back(scores[i]);
          fy.push_back(labels[i]);
        }
      }
      CHECK(r.buckets[b].count == static_cast<long long>(fs.size()));
      if (r.buckets[b].has_auc)
        CHECK(r.buckets[b].auc == doctest::Approx(auc(fs, fy)).epsilon(1e-12));
    }
  }

  SUBCASE("empty buckets report count 0 with the AUC omitted") {
    auto r = cold_start_report(scores, labels, hist, {0, 3, 100, 200});
    CHECK(r.buckets[3].count == 0);
    CHECK_FALSE(r.buckets[3].has_auc);
    CHECK(r.buckets[3].key == "101-200");
  }

  SUBCASE("bounds must increase") {
    CHECK_THROWS_AS(cold_start_report(scores, labels, hist, {5, 5}), DataError);
    CHECK_THROWS_AS(cold_start_report(scores, labels, hist, {5, 3}), DataError);
  }
}

TEST_CASE("history counts come from the user's item-typed degree") {
  TempDir dir;
  Rng rng(3);
  auto hin = testutil::make_random_hin(dir, rng, 6, 6, 4, 0.3);
  std::vector<Instance> insts;
  Instance i1;
  i1.user = hin.graph.node_id("u0");
  i1.item = hin.graph.node_id("i0");
  insts.push_back(i1);
  auto h = history_counts(hin.graph, insts, hin.graph.schema().type_id("item"));
  CHECK(h[0] ==
        static_cast<long long>(hin.graph.neighbors(i1.user, 1).size()));
}

TEST_CASE("mask ablation harness") {
  TempDir dir;
  Rng rng(41);
  auto hin = testutil::make_random_hin(dir, rng, 10, 10, 6, 0.25);

  TrainConfig base;
  base.model.d = 8;
  base.model.heads = 4;
  base.model.layers = 1;
  base.model.d_ff = 12;
  base.model.d_embed = 3;
  base.model.mlp_hidden = 6;
  base.pipeline.user_type = "user";
  base.pipeline.item_type = "item";
  base.pipeline.default_budget = 3;
  base.epochs = 1;
  base.batch_size = 4;
  base.resamples = 1;
  base.gamma = 0.0;

  std::vector<Instance> train_set, test_set;
  for (int k = 0; k < 12; ++k) {
    Instance inst;
    inst.user = hin.graph.node_id("u" + std::to_string(k % 10));
    inst.item = hin.graph.node_id("i" + std::to_string((k * 7 + 2) % 10));
    inst.label = k % 3 == 0 ? 1 : 0;
    (k < 8 ? train_set : test_set).push_back(inst);
  }

  const std::vector<MaskKind> all4{MaskKind::Induced, MaskKind::Similarity,
                                   MaskKind::Cross, MaskKind::Complete};
  auto results = run_mask_ablation(hin.graph, train_set, test_set, base,
                                   {all4, {MaskKind::Complete}}, {5});
  REQUIRE(results.size() == 2);
  CHECK(results[0].name == "IG,SG,CG,PG");
  CHECK(results[1].name == "PG");
  for (const auto& r : results) {
    CHECK(r.report.count == 4);
    CHECK(r.report.logloss >= 0.0);
  }

  // the full subset reproduces the base configuration exactly
  TrainConfig cfg = base;
  cfg.seed = 5;
  ModelParams params = init_model(hin.graph.schema(), cfg);
  fit(hin.graph, train_set, nullptr, cfg, params);
  auto scores = score_instances(hin.graph, test_set, params, cfg.pipeline,
                                Rng::mix(5, 0xEA0));
  std::vector<int> labels;
  for (const auto& t : test_set) labels.push_back(t.label);
  CHECK(results[0].report.logloss ==
        doctest::Approx(evaluate_scores(scores, labels).logloss).epsilon(1e-15));

  // report table renders
  auto tsv = variants_to_tsv(results);
  CHECK(tsv.find("variant\tseed\tauc\tlogloss") == 0);
  CHECK(tsv.find("IG,SG,CG,PG") != std::string::npos);

  CHECK_THROWS_AS(
      run_mask_ablation(hin.graph, train_set, test_set, base, {{}}, {5}), DataError);
}
