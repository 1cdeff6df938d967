// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>

#include "lgi/interval.hpp"
#include "lgi/params.hpp"
#include "lgi/scorer.hpp"
#include "lgi/tensor.hpp"

namespace lgi {

struct HeadParams {
  ScorerParams temporal;  // MLP_tatt: d -> d/2 (tanh) -> 1
  Tensor reg_w1;          // MLP_reg: d -> d (relu) -> 2
  Tensor reg_b1;
  Tensor reg_w2;
  Tensor reg_b2;

  static HeadParams init(std::size_t d, ParamFactory& factory);
  void collect(const std::string& prefix, NamedParams& out) const;
};

struct Prediction {
  Tensor raw;        // [2, 1] unbounded (t_start, t_end), fed to the loss
  Tensor attention;  // o: [1, T]
  Tensor summary;    // v: [d, 1]

  double start() const { return raw.at(0); }
  double end() const { return raw.at(1); }
};

// Temporal attention over the columns of R [d, T], attention-weighted
// summary, then interval regression. `valid`, when non-empty, masks the
// attention of zero-filled segments.
Prediction predict_interval(const Tensor& segments, const HeadParams& params,
                            std::span<const std::uint8_t> valid = {});

// Clamps both ends to [0, 1] and orders them.
Interval canonicalize(double start, double end);

}  // namespace lgi
