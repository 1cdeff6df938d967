// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "lgi/interval.hpp"

namespace lgi {

// Intersection over union of two intervals; 0 when the union is empty.
double tiou(const Interval& a, const Interval& b);

struct EvalReport {
  std::map<double, double> recall_at;  // threshold -> percentage
  double miou = 0.0;                   // percentage
  std::size_t n_samples = 0;

  double recall(double threshold) const { return recall_at.at(threshold); }
};

inline const std::vector<double> kDefaultThresholds{0.3, 0.5, 0.7};

// R@tau counts samples whose tIoU is strictly larger than tau.
EvalReport evaluate(std::span<const Interval> predictions, std::span<const Interval> truths,
                    std::span<const double> thresholds = kDefaultThresholds);

nlohmann::json to_json(const EvalReport& report);
// "n,R@0.3,R@0.5,R@0.7,mIoU"
std::string csv_header(const EvalReport& report);
std::string to_csv(const EvalReport& report);

enum class BaselineKind { kRandom, kCenterPrior };
BaselineKind parse_baseline(const std::string& name);

// Single interval on a 0.01 grid maximizing mean tIoU against `truths`.
Interval fit_center_prior(std::span<const Interval> truths);

// Uniform random intervals (two uniform draws, ordered).
std::vector<Interval> random_intervals(std::size_t count, std::uint64_t seed);

}  // namespace lgi
