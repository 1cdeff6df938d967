// SPDX-License-Identifier: Apache-2.0
#pragma once

namespace lgi {

// Normalized time interval.
struct Interval {
  double start = 0.0;
  double end = 0.0;

  double length() const { return end - start; }
  friend bool operator==(const Interval&, const Interval&) = default;
};

}  // namespace lgi
