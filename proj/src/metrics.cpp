// SPDX-License-Identifier: Apache-2.0
#include "lgi/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <random>

#include "lgi/errors.hpp"

namespace lgi {

double tiou(const Interval& a, const Interval& b) {
  const double inter = std::max(0.0, std::min(a.end, b.end) - std::max(a.start, b.start));
  const double uni = std::max(a.end, b.end) - std::min(a.start, b.start);
  if (!(uni > 0.0)) return 0.0;
  return std::clamp(inter / uni, 0.0, 1.0);
}

EvalReport evaluate(std::span<const Interval> predictions, std::span<const Interval> truths,
                    std::span<const double> thresholds) {
  if (predictions.size() != truths.size()) {
    throw LengthMismatch("evaluate: " + std::to_string(predictions.size()) + " predictions for " +
                         std::to_string(truths.size()) + " ground truths");
  }
  if (predictions.empty()) throw EmptyInput("evaluate: no samples");

  std::vector<std::size_t> hits(thresholds.size(), 0);
  double total = 0.0;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    const double overlap = tiou(predictions[i], truths[i]);
    total += overlap;
    for (std::size_t k = 0; k < thresholds.size(); ++k) {
      if (overlap > thresholds[k]) ++hits[k];
    }
  }
  const double n = static_cast<double>(predictions.size());
  EvalReport report;
  report.n_samples = predictions.size();
  report.miou = 100.0 * total / n;
  for (std::size_t k = 0; k < thresholds.size(); ++k) {
    report.recall_at[thresholds[k]] = 100.0 * static_cast<double>(hits[k]) / n;
  }
  return report;
}

namespace {

std::string threshold_key(double t) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "R@%g", t);
  return buf;
}

}  // namespace

nlohmann::json to_json(const EvalReport& report) {
  nlohmann::ordered_json j;
  for (const auto& [t, r] : report.recall_at) j[threshold_key(t)] = r;
  j["mIoU"] = report.miou;
  j["n_samples"] = report.n_samples;
  return nlohmann::json::parse(j.dump());
}

std::string csv_header(const EvalReport& report) {
  std::string line = "n";
  for (const auto& entry : report.recall_at) line += "," + threshold_key(entry.first);
  return line + ",mIoU";
}

std::string to_csv(const EvalReport& report) {
  std::string line = std::to_string(report.n_samples);
  char buf[64];
  for (const auto& entry : report.recall_at) {
    std::snprintf(buf, sizeof buf, ",%.4f", entry.second);
    line += buf;
  }
  std::snprintf(buf, sizeof buf, ",%.4f", report.miou);
  return line + buf;
}

BaselineKind parse_baseline(const std::string& name) {
  if (name == "random") return BaselineKind::kRandom;
  if (name == "center_prior") return BaselineKind::kCenterPrior;
  throw InvalidArgument("unknown baseline '" + name + "' (expected random or center_prior)");
}

Interval fit_center_prior(std::span<const Interval> truths) {
  if (truths.empty()) throw EmptyInput("fit_center_prior: no ground truths");
  constexpr int kSteps = 100;
  Interval best{0.0, 1.0};
  double best_score = -1.0;
  for (int s = 0; s < kSteps; ++s) {
    for (int e = s + 1; e <= kSteps; ++e) {
      const Interval cand{s / double(kSteps), e / double(kSteps)};
      double score = 0.0;
      for (const auto& gt : truths) score += tiou(cand, gt);
      if (score > best_score) {
        best_score = score;
        best = cand;
      }
    }
  }
  return best;
}

std::vector<Interval> random_intervals(std::size_t count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<Interval> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    double a = unit(rng), b = unit(rng);
    if (a > b) std::swap(a, b);
    out.push_back({a, b});
  }
  return out;
}

}  // namespace lgi
