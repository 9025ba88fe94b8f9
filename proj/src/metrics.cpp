#include "hinctr/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>
#include <sstream>

namespace hinctr {

double auc(const std::vector<double>& scores, const std::vector<int>& labels) {
  if (scores.size() != labels.size()) throw DataError("auc: scores/labels length mismatch");
  const size_t n = scores.size();
  long long pos = 0;
  for (int y : labels) {
    if (y != 0 && y != 1) throw DataError("auc: label outside {0,1}");
    pos += y;
  }
  long long neg = static_cast<long long>(n) - pos;
  if (pos == 0 || neg == 0) throw DataError("auc: needs at least one positive and one negative");

  std::vector<size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(),
            [&](size_t a, size_t b) { return scores[a] < scores[b]; });

  // Midranks give tied scores the average of their rank range, which is
  // exactly the half-credit pairwise definition.
  double pos_rank_sum = 0.0;
  size_t i = 0;
  while (i < n) {
    size_t j = i;
    while (j + 1 < n && scores[idx[j + 1]] == scores[idx[i]]) ++j;
    double midrank = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j + 1));
    for (size_t k = i; k <= j; ++k)
      if (labels[idx[k]] == 1) pos_rank_sum += midrank;
    i = j + 1;
  }
  double p = static_cast<double>(pos);
  return (pos_rank_sum - p * (p + 1.0) / 2.0) / (p * static_cast<double>(neg));
}

double logloss(const std::vector<double>& scores, const std::vector<int>& labels) {
  if (scores.size() != labels.size())
    throw DataError("logloss: scores/labels length mismatch");
  if (scores.empty()) throw DataError("logloss: empty input");
  double sum = 0.0;
  for (size_t i = 0; i < scores.size(); ++i) {
    if (!(scores[i] > 0.0 && scores[i] < 1.0))
      throw DataError("logloss: score outside (0,1)");
    sum += bce_loss(scores[i], labels[i]);
  }
  return sum / static_cast<double>(scores.size());
}

EvalReport evaluate_scores(const std::vector<double>& scores,
                           const std::vector<int>& labels) {
  EvalReport r;
  r.count = static_cast<long long>(scores.size());
  for (int y : labels) r.positives += y;
  if (r.positives > 0 && r.positives < r.count) {
    r.has_auc = true;
    r.auc = auc(scores, labels);
  }
  r.logloss = logloss(scores, labels);
  return r;
}

std::vector<long long> history_counts(const HinGraph& g,
                                      const std::vector<Instance>& instances,
                                      int item_type) {
  std::vector<long long> out;
  out.reserve(instances.size());
  for (const auto& inst : instances)
    out.push_back(static_cast<long long>(g.neighbors(inst.user, item_type).size()));
  return out;
}

EvalReport cold_start_report(const std::vector<double>& scores,
                             const std::vector<int>& labels,
                             const std::vector<long long>& histories,
                             const std::vector<long long>& bounds) {
  if (scores.size() != histories.size())
    throw DataError("cold_start_report: histories length mismatch");
  for (size_t i = 1; i < bounds.size(); ++i)
    if (bounds[i] <= bounds[i - 1]) throw DataError("bucket bounds must be increasing");
  if (!bounds.empty() && bounds[0] < 0) throw DataError("bucket bounds must be >= 0");

  EvalReport r = evaluate_scores(scores, labels);
  const size_t nb = bounds.size() + 1;
  std::vector<std::vector<double>> bscores(nb);
  std::vector<std::vector<int>> blabels(nb);
  for (size_t i = 0; i < scores.size(); ++i) {
    size_t b = 0;
    while (b < bounds.size() && histories[i] > bounds[b]) ++b;
    bscores[b].push_back(scores[i]);
    blabels[b].push_back(labels[i]);
  }
  for (size_t b = 0; b < nb; ++b) {
    EvalReport::Bucket bucket;
    long long lo = b == 0 ? 0 : bounds[b - 1] + 1;
    if (b == bounds.size()) {
      bucket.key = ">" + std::to_string(bounds.empty() ? 0 : bounds.back());
    } else if (lo == bounds[b]) {
      bucket.key = std::to_string(lo);
    } else {
      bucket.key = std::to_string(lo) + "-" + std::to_string(bounds[b]);
    }
    bucket.count = static_cast<long long>(bscores[b].size());
    long long pos = 0;
    for (int y : blabels[b]) pos += y;
    if (pos > 0 && pos < bucket.count) {
      bucket.has_auc = true;
      bucket.auc = auc(bscores[b], blabels[b]);
    }
    r.buckets.push_back(std::move(bucket));
  }
  return r;
}

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

}  // namespace

std::string report_to_tsv(const EvalReport& report) {
  std::ostringstream os;
  os << "metric\tvalue\n";
  os << "count\t" << report.count << "\n";
  os << "positives\t" << report.positives << "\n";
  os << "auc\t" << (report.has_auc ? fmt(report.auc) : "na") << "\n";
  os << "logloss\t" << fmt(report.logloss) << "\n";
  if (!report.buckets.empty()) {
    os << "bucket\tcount\tauc\n";
    for (const auto& b : report.buckets)
      os << b.key << "\t" << b.count << "\t" << (b.has_auc ? fmt(b.auc) : "na") << "\n";
  }
  return os.str();
}

std::vector<VariantResult> run_variants(
    const HinGraph& g, const std::vector<Instance>& train,
    const std::vector<Instance>& test,
    const std::vector<std::pair<std::string, TrainConfig>>& variants,
    const std::vector<uint64_t>& seeds) {
  if (seeds.empty()) throw DataError("run_variants needs at least one seed");
  std::vector<VariantResult> results;
  std::vector<int> labels;
  labels.reserve(test.size());
  for (const auto& inst : test) labels.push_back(inst.label);

  for (const auto& [name, variant_cfg] : variants) {
    for (uint64_t seed : seeds) {
      TrainConfig cfg = variant_cfg;
      cfg.seed = seed;
      ModelParams params = init_model(g.schema(), cfg);
      fit(g, train, nullptr, cfg, params);
      auto scores =
          score_instances(g, test, params, cfg.pipeline, Rng::mix(seed, 0xEA0));
      VariantResult vr;
      vr.name = name;
      vr.seed = seed;
      vr.report = evaluate_scores(scores, labels);
      results.push_back(std::move(vr));
    }
  }
  return results;
}

std::vector<VariantResult> run_mask_ablation(
    const HinGraph& g, const std::vector<Instance>& train,
    const std::vector<Instance>& test, const TrainConfig& base,
    const std::vector<std::vector<MaskKind>>& subsets,
    const std::vector<uint64_t>& seeds) {
  std::vector<std::pair<std::string, TrainConfig>> variants;
  for (const auto& subset : subsets) {
    if (subset.empty()) throw DataError("mask subset must not be empty");
    TrainConfig cfg = base;
    cfg.active_masks = subset;
    std::string name;
    for (size_t i = 0; i < subset.size(); ++i)
      name += std::string(i ? "," : "") + mask_kind_name(subset[i]);
    variants.emplace_back(name, cfg);
  }
  return run_variants(g, train, test, variants, seeds);
}

std::string variants_to_tsv(const std::vector<VariantResult>& results) {
  std::ostringstream os;
  os << "variant\tseed\tauc\tlogloss\n";
  std::map<std::string, std::pair<double, int>> mean_auc;
  for (const auto& r : results) {
    os << r.name << "\t" << r.seed << "\t"
       << (r.report.has_auc ? fmt(r.report.auc) : "na") << "\t" << fmt(r.report.logloss)
       << "\n";
    if (r.report.has_auc) {
      mean_auc[r.name].first += r.report.auc;
      mean_auc[r.name].second += 1;
    }
  }
  // preserve first-appearance order for the mean rows
  std::vector<std::string> order;
  for (const auto& r : results) {
    bool seen = false;
    for (const auto& o : order) seen |= o == r.name;
    if (!seen) order.push_back(r.name);
  }
  for (const auto& name : order) {
    auto it = mean_auc.find(name);
    if (it != mean_auc.end() && it->second.second > 0)
      os << name << "\tmean\t" << fmt(it->second.first / it->second.second) << "\t-\n";
  }
  return os.str();
}

}  // namespace hinctr
