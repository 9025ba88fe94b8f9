#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <sstream>

#include "hinctr/pipeline.hpp"
#include "test_util.hpp"

using namespace hinctr;
using testutil::TempDir;
using testutil::read_file;

namespace {

std::string cli_path() {
  const char* p = std::getenv("HINCTR_CLI");
  REQUIRE_MESSAGE(p != nullptr, "HINCTR_CLI must point at the CLI binary");
  return p;
}

int run_cli(const std::string& args, const std::string& stdout_path) {
  std::string cmd = cli_path() + " " + args + " >" + stdout_path + " 2>&1";
  int status = std::system(cmd.c_str());
  REQUIRE(status != -1);
  return WEXITSTATUS(status);
}

}  // namespace

TEST_CASE("no arguments is a usage error") {
  TempDir dir;
  CHECK(run_cli("", dir.file("out.txt")) == 1);
  CHECK(run_cli("frobnicate", dir.file("out.txt")) == 1);
}

TEST_CASE("missing files are data errors") {
  TempDir dir;
  CHECK(run_cli("build-graph --graph /nonexistent", dir.file("out.txt")) == 2);
}

TEST_CASE("synth then full pipeline round trip") {
  TempDir dir;
  std::string data = dir.file("data");
  int rc = run_cli("synth --out " + data +
                       " --users 60 --items 40 --publishers 8 --articles 40"
                       " --train-instances 240 --test-instances 60 --seed 3",
                   dir.file("synth.txt"));
  REQUIRE(rc == 0);

  SUBCASE("build-graph validates and reports counts") {
    REQUIRE(run_cli("build-graph --graph " + data, dir.file("counts.txt")) == 0);
    std::string out = read_file(dir.file("counts.txt"));
    CHECK(out.find("nodes\t148") != std::string::npos);
    CHECK(out.find("nodes[user]\t60") != std::string::npos);

    // canonical re-serialisation round-trips byte-identically
    REQUIRE(run_cli("build-graph --graph " + data + " --out-nodes " + dir.file("n1.tsv") +
                        " --out-edges " + dir.file("e1.tsv"),
                    dir.file("rt1.txt")) == 0);
    REQUIRE(run_cli("build-graph --nodes " + dir.file("n1.tsv") + " --edges " +
                        dir.file("e1.tsv") + " --schema " + data +
                        "/schema.txt --out-nodes " + dir.file("n2.tsv") + " --out-edges " +
                        dir.file("e2.tsv"),
                    dir.file("rt2.txt")) == 0);
    CHECK(read_file(dir.file("n1.tsv")) == read_file(dir.file("n2.tsv")));
    CHECK(read_file(dir.file("e1.tsv")) == read_file(dir.file("e2.tsv")));
  }

  SUBCASE("sample matches the library and is process-deterministic") {
    std::string args = "sample --graph " + data +
                       " --target u5 --sampler ghn"
                       " --budgets user=4,item=4,publisher=2,article=4 --seed 11";
    REQUIRE(run_cli(args, dir.file("s1.txt")) == 0);
    REQUIRE(run_cli(args, dir.file("s2.txt")) == 0);
    CHECK(read_file(dir.file("s1.txt")) == read_file(dir.file("s2.txt")));

    HinGraph g = HinGraph::load(data + "/nodes.tsv", data + "/edges.tsv",
                                FeatureSchema::load(data + "/schema.txt"));
    PipelineConfig pc;
    pc.budgets = {{"user", 4}, {"item", 4}, {"publisher", 2}, {"article", 4}};
    auto sampled = run_sampler(g, g.node_id("u5"), pc, 11);
    std::ostringstream want;
    for (const auto& sn : sampled)
      want << g.node_name(sn.node) << '\t' << g.schema().type_name(g.type_of(sn.node))
           << '\t' << sn.hop << "\n";
    CHECK(read_file(dir.file("s1.txt")) == want.str());
  }

  SUBCASE("pair sampling emits masks on request") {
    REQUIRE(run_cli("sample --graph " + data +
                        " --target u5 --target-v i7 --seed 4 --emit-masks",
                    dir.file("pair.txt")) == 0);
    std::string out = read_file(dir.file("pair.txt"));
    CHECK(out.find("# mask IG") != std::string::npos);
    CHECK(out.find("# mask SG") != std::string::npos);
    CHECK(out.find("# mask CG") != std::string::npos);
    CHECK(out.find("# mask PG") != std::string::npos);
    // masks need a pair
    CHECK(run_cli("sample --graph " + data + " --target u5 --emit-masks",
                  dir.file("bad.txt")) == 1);
  }

  SUBCASE("train writes a checkpoint and eval reports a sane AUC") {
    std::string ckpt = dir.file("model.ckpt");
    int rc_train = run_cli(
        "train --graph " + data + " --train " + data + "/train.tsv --valid " + data +
            "/test.tsv --out " + ckpt +
            " --set epochs=2 --set budgets=user=4,item=4,publisher=2,article=4"
            " --set resamples=1 --seed 9",
        dir.file("train.txt"));
    REQUIRE(rc_train == 0);
    std::string log = read_file(dir.file("train.txt"));
    CHECK(log.find("epoch=1 loss=") != std::string::npos);
    CHECK(log.find("auc=") != std::string::npos);

    REQUIRE(run_cli("eval --graph " + data + " --checkpoint " + ckpt + " --test " + data +
                        "/test.tsv --buckets 0,5,20",
                    dir.file("eval.txt")) == 0);
    std::string report = read_file(dir.file("eval.txt"));
    CHECK(report.find("metric\tvalue") == 0);
    auto pos = report.find("auc\t");
    REQUIRE(pos != std::string::npos);
    double auc_value = std::stod(report.substr(pos + 4));
    CHECK(auc_value >= 0.0);
    CHECK(auc_value <= 1.0);
    CHECK(report.find("bucket\tcount\tauc") != std::string::npos);

    // unknown config keys fail loudly
    CHECK(run_cli("train --graph " + data + " --train " + data +
                      "/train.tsv --set nonsense=1",
                  dir.file("bad2.txt")) == 2);
  }
}
