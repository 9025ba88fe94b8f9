#pragma once
// Ranking metrics and evaluation reports: rank-based AUC with midrank tie
// handling, mean logloss, optional per-bucket breakdown for cold-start
// analysis, and the retrain-per-variant ablation harness.

#include <string>
#include <vector>

#include "hinctr/train.hpp"

namespace hinctr {

// Probability that a random positive outranks a random negative, ties
// counted half. O(N log N) via midranks. Throws on a single-class input.
double auc(const std::vector<double>& scores, const std::vector<int>& labels);

// Mean binary cross entropy; every score must lie in (0, 1).
double logloss(const std::vector<double>& scores, const std::vector<int>& labels);

struct EvalReport {
  long long count = 0;
  long long positives = 0;
  bool has_auc = false;
  double auc = 0.0;
  double logloss = 0.0;

  struct Bucket {
    std::string key;
    long long count = 0;
    bool has_auc = false;
    double auc = 0.0;
  };
  std::vector<Bucket> buckets;
};

EvalReport evaluate_scores(const std::vector<double>& scores,
                           const std::vector<int>& labels);

// Historical click count of each instance's user: its item-typed degree.
std::vector<long long> history_counts(const HinGraph& g,
                                      const std::vector<Instance>& instances,
                                      int item_type);

// Buckets by increasing upper bounds b: [0,b0], [b0+1,b1], ..., (b_last, inf).
// Empty or single-class buckets report their count with the AUC omitted.
EvalReport cold_start_report(const std::vector<double>& scores,
                             const std::vector<int>& labels,
                             const std::vector<long long>& histories,
                             const std::vector<long long>& bounds);

std::string report_to_tsv(const EvalReport& report);

// One full train + test evaluation per (variant, seed) pair.
struct VariantResult {
  std::string name;
  uint64_t seed = 0;
  EvalReport report;
};

std::vector<VariantResult> run_variants(
    const HinGraph& g, const std::vector<Instance>& train,
    const std::vector<Instance>& test,
    const std::vector<std::pair<std::string, TrainConfig>>& variants,
    const std::vector<uint64_t>& seeds);

// Mask-subset ablation: each subset keeps only the listed kinds, excluded
// kinds hand their heads round-robin to the kept ones.
std::vector<VariantResult> run_mask_ablation(
    const HinGraph& g, const std::vector<Instance>& train,
    const std::vector<Instance>& test, const TrainConfig& base,
    const std::vector<std::vector<MaskKind>>& subsets,
    const std::vector<uint64_t>& seeds);

std::string variants_to_tsv(const std::vector<VariantResult>& results);

}  // namespace hinctr
