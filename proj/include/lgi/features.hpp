// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace lgi {

// Raw per-segment video features, time-major: row t holds the d_v values of
// segment t. Values are f32 to match the on-disk feature blobs.
struct FeatureMatrix {
  std::uint32_t frames = 0;
  std::uint32_t dims = 0;
  std::vector<float> values;

  float at(std::size_t t, std::size_t c) const { return values[t * dims + c]; }
  float& at(std::size_t t, std::size_t c) { return values[t * dims + c]; }

  friend bool operator==(const FeatureMatrix&, const FeatureMatrix&) = default;
};

}  // namespace lgi
