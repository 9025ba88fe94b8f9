#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "hinctr/train.hpp"
#include "test_util.hpp"

using namespace hinctr;
using testutil::TempDir;

namespace {

struct TrainFixture {
  TempDir dir;
  testutil::RandomHin hin;
  TrainConfig cfg;
  std::vector<Instance> instances;

  explicit TrainFixture(uint64_t seed, int n_instances = 8) {
    Rng rng(seed);
    hin = testutil::make_random_hin(dir, rng, 10, 10, 6, 0.2);
    cfg.model.d = 8;
    cfg.model.heads = 4;
    cfg.model.layers = 1;
    cfg.model.d_ff = 12;
    cfg.model.d_embed = 3;
    cfg.model.mlp_hidden = 6;
    cfg.pipeline.user_type = "user";
    cfg.pipeline.item_type = "item";
    cfg.pipeline.default_budget = 3;
    cfg.batch_size = 4;
    cfg.epochs = 1;
    cfg.resamples = 1;
    cfg.gamma = 0.0;
    cfg.seed = seed;
    for (int k = 0; k < n_instances; ++k) {
      Instance inst;
      inst.user = hin.graph.node_id("u" + std::to_string(k % 10));
      inst.item = hin.graph.node_id("i" + std::to_string((k * 3 + 1) % 10));
      inst.label = static_cast<int>(rng.below(2));
      instances.push_back(inst);
    }
    instances[0].label = 1;  // both classes present
    if (instances.size() > 1) instances[1].label = 0;
  }
};

std::vector<double> snapshot(ModelParams& params) {
  std::vector<double> out;
  for (Parameter* p : params.all())
    for (size_t i = 0; i < p->value.size(); ++i) out.push_back(p->value[i]);
  return out;
}

}  // namespace

TEST_CASE("bce_loss values") {
  CHECK(bce_loss(0.5, 1) == doctest::Approx(0.693147180559945309).epsilon(1e-15));
  CHECK(bce_loss(0.5, 0) == doctest::Approx(0.693147180559945309).epsilon(1e-15));
  CHECK(bce_loss(0.8, 1) == doctest::Approx(0.223143551314209756).epsilon(1e-14));
  CHECK(bce_loss(1.0 - 1e-12, 1) < 2e-12);
  CHECK(bce_loss(1e-12, 0) < 2e-12);
  CHECK_THROWS_AS(bce_loss(0.0, 0), NumericError);
  CHECK_THROWS_AS(bce_loss(1.0, 1), NumericError);
  CHECK_THROWS_AS(bce_loss(0.5, 2), NumericError);
}

TEST_CASE("consistency_loss values") {
  SUBCASE("a single sample equals its mean") {
    CHECK(consistency_loss({{0.3, -0.7, 2.0}}) == 0.0);
  }
  SUBCASE("identical samples give exactly zero") {
    std::vector<std::vector<double>> gs(5, {1.0, 2.0, 3.0});
    CHECK(consistency_loss(gs) == 0.0);
  }
  SUBCASE("hand-evaluated two-sample case") {
    // g1=(0,0), g2=(2,0): mean (1,0), each deviation norm 1, d_g=2
    CHECK(consistency_loss({{0.0, 0.0}, {2.0, 0.0}}) ==
          doctest::Approx(0.5).epsilon(1e-15));
  }
  SUBCASE("matches a brute-force evaluation on random samples") {
    Rng rng(15);
    for (int trial = 0; trial < 30; ++trial) {
      const int S = 1 + static_cast<int>(rng.below(5));
      const int d = 1 + static_cast<int>(rng.below(6));
      std::vector<std::vector<double>> gs(S, std::vector<double>(d));
      for (auto& g : gs)
        for (auto& x : g) x = rng.uniform(-2, 2);
      // brute force
      std::vector<double> mean(d, 0);
      for (const auto& g : gs)
        for (int i = 0; i < d; ++i) mean[i] += g[i] / S;
      double want = 0;
      for (const auto& g : gs) {
        double acc = 0;
        for (int i = 0; i < d; ++i) acc += (g[i] - mean[i]) * (g[i] - mean[i]);
        want += std::sqrt(acc) / d;
      }
      want /= S;
      double got = consistency_loss(gs);
      CHECK(got == doctest::Approx(want).epsilon(1e-12));
      CHECK(got >= 0.0);
    }
  }
  SUBCASE("width mismatch is rejected") {
    CHECK_THROWS_AS(consistency_loss({{1.0, 2.0}, {1.0}}), NumericError);
  }
}

TEST_CASE("total_loss") {
  CHECK(total_loss(0.42, 1.7, 0.0) == 0.42);
  CHECK(total_loss(0.42, 0.0, 3.0) == 0.42);
  CHECK(total_loss(0.3, 0.5, 0.1) == doctest::Approx(0.35).epsilon(1e-15));
  CHECK_THROWS_AS(total_loss(0.3, 0.5, -0.1), NumericError);
}

TEST_CASE("zero learning rate leaves parameters unchanged") {
  TrainFixture fx(51);
  fx.cfg.lr = 0.0;
  fx.cfg.optimizer = OptimizerKind::Sgd;
  ModelParams params = init_model(fx.hin.graph.schema(), fx.cfg);
  auto before = snapshot(params);
  fit(fx.hin.graph, fx.instances, nullptr, fx.cfg, params);
  CHECK(snapshot(params) == before);
}

TEST_CASE("one SGD step equals -lr times the single-forward gradient") {
  TrainFixture fx(52, /*n_instances=*/1);
  fx.cfg.optimizer = OptimizerKind::Sgd;
  fx.cfg.lr = 0.05;
  fx.cfg.batch_size = 1;
  fx.cfg.resamples = 1;
  fx.cfg.gamma = 0.0;

  ModelParams params = init_model(fx.hin.graph.schema(), fx.cfg);
  ModelParams oracle = init_model(fx.hin.graph.schema(), fx.cfg);  // same init seed

  fit(fx.hin.graph, fx.instances, nullptr, fx.cfg, params);

  const Instance& inst = fx.instances[0];
  uint64_t seed = fit_resample_seed(fx.cfg, 1, 0, 0);
  Neighbourhood nb = sample_pair(fx.hin.graph, inst.user, inst.item, fx.cfg.pipeline, seed);
  MaskSet masks = masks_for(fx.hin.graph, nb, oracle.partition(), fx.cfg.pipeline, seed);
  Tape tape;
  ForwardNodes fwd = model_forward(tape, oracle, fx.hin.graph, nb, masks, {});
  auto loss = tape.bce(fwd.y_hat, inst.label);
  oracle.zero_grads();
  tape.backward(loss);

  auto got = params.all();
  auto want = oracle.all();
  for (size_t pi = 0; pi < got.size(); ++pi)
    for (size_t i = 0; i < got[pi]->value.size(); ++i)
      CHECK(got[pi]->value[i] == want[pi]->value[i] - 0.05 * want[pi]->grad[i]);
}

TEST_CASE("fit is deterministic for a fixed seed") {
  TrainFixture fx(53);
  fx.cfg.epochs = 2;
  fx.cfg.resamples = 2;
  fx.cfg.gamma = 0.1;
  ModelParams a = init_model(fx.hin.graph.schema(), fx.cfg);
  ModelParams b = init_model(fx.hin.graph.schema(), fx.cfg);
  auto ra = fit(fx.hin.graph, fx.instances, nullptr, fx.cfg, a);
  auto rb = fit(fx.hin.graph, fx.instances, nullptr, fx.cfg, b);
  CHECK(snapshot(a) == snapshot(b));
  REQUIRE(ra.epochs.size() == rb.epochs.size());
  for (size_t e = 0; e < ra.epochs.size(); ++e) CHECK(ra.epochs[e].loss == rb.epochs[e].loss);
}

TEST_CASE("gamma = 0 training is bit-identical to a run without the CR term") {
  TrainFixture fx(54);
  fx.cfg.epochs = 2;
  fx.cfg.resamples = 3;

  TrainConfig with_cr = fx.cfg;
  with_cr.gamma = 0.0;
  with_cr.cr_enabled = true;
  TrainConfig without_cr = fx.cfg;
  without_cr.gamma = 0.0;
  without_cr.cr_enabled = false;

  ModelParams a = init_model(fx.hin.graph.schema(), with_cr);
  ModelParams b = init_model(fx.hin.graph.schema(), without_cr);
  auto ra = fit(fx.hin.graph, fx.instances, nullptr, with_cr, a);
  auto rb = fit(fx.hin.graph, fx.instances, nullptr, without_cr, b);
  CHECK(snapshot(a) == snapshot(b));
  // the run with CR enabled still reports a nonzero regulariser value
  CHECK(ra.first_step_cr > 0.0);
  CHECK(rb.first_step_cr == 0.0);
}

TEST_CASE("consistency regularizer reacts to the sampling mode") {
  TrainFixture fx(55);
  fx.cfg.resamples = 4;
  fx.cfg.gamma = 0.1;

  SUBCASE("fresh resamples give a positive first-step CR") {
    ModelParams params = init_model(fx.hin.graph.schema(), fx.cfg);
    auto result = fit(fx.hin.graph, fx.instances, nullptr, fx.cfg, params);
    CHECK(result.first_step_cr > 0.0);
  }
  SUBCASE("freezing the sampler seed drives CR to exactly zero") {
    fx.cfg.resample_mode = ResampleMode::Frozen;
    ModelParams params = init_model(fx.hin.graph.schema(), fx.cfg);
    auto result = fit(fx.hin.graph, fx.instances, nullptr, fx.cfg, params);
    CHECK(result.first_step_cr == 0.0);
  }
}

TEST_CASE("multi-worker training merges gradients deterministically") {
  TrainFixture fx(56, 12);
  fx.cfg.epochs = 1;
  fx.cfg.workers = 3;
  ModelParams a = init_model(fx.hin.graph.schema(), fx.cfg);
  fit(fx.hin.graph, fx.instances, nullptr, fx.cfg, a);
  ModelParams b = init_model(fx.hin.graph.schema(), fx.cfg);
  fit(fx.hin.graph, fx.instances, nullptr, fx.cfg, b);
  CHECK(snapshot(a) == snapshot(b));
}

TEST_CASE("fit validates its inputs") {
  TrainFixture fx(57);
  ModelParams params = init_model(fx.hin.graph.schema(), fx.cfg);
  SUBCASE("empty training set") {
    std::vector<Instance> empty;
    CHECK_THROWS_AS(fit(fx.hin.graph, empty, nullptr, fx.cfg, params), DataError);
  }
  SUBCASE("label outside {0,1}") {
    auto bad = fx.instances;
    bad[2].label = 7;
    CHECK_THROWS_AS(fit(fx.hin.graph, bad, nullptr, fx.cfg, params), DataError);
  }
  SUBCASE("config invariants") {
    TrainConfig c = fx.cfg;
    c.resamples = 0;
    CHECK_THROWS_AS(c.validate(), DataError);
    c = fx.cfg;
    c.gamma = -0.5;
    CHECK_THROWS_AS(c.validate(), DataError);
    c = fx.cfg;
    c.lr = -1.0;
    CHECK_THROWS_AS(c.validate(), DataError);
  }
}

TEST_CASE("S1 and S2 drop the similarity mask from the head allocation") {
  TrainFixture fx(58);
  fx.cfg.pipeline.strategy = Strategy::S1;
  auto kinds = effective_mask_kinds(fx.cfg);
  for (MaskKind k : kinds) CHECK(k != MaskKind::Similarity);
  ModelParams params = init_model(fx.hin.graph.schema(), fx.cfg);
  for (MaskKind k : params.config().head_kinds) CHECK(k != MaskKind::Similarity);

  fx.cfg.active_masks = {MaskKind::Similarity};
  CHECK_THROWS_AS(effective_mask_kinds(fx.cfg), DataError);
}
