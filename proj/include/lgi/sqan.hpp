// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "lgi/params.hpp"
#include "lgi/tensor.hpp"

namespace lgi {

// Sequential query attention: one W_q per phrase step plus the shared
// guidance and word-scoring weights. Scoring layers carry no bias.
struct SqanParams {
  Tensor w_guide;              // W_g: [d, 2d]
  std::vector<Tensor> w_step;  // W_q^(n): N x [d, d]
  Tensor w_score;              // W_qatt: [1, d/2]
  Tensor w_guide_att;          // W_g_alpha: [d/2, d]
  Tensor w_word_att;           // W_w_alpha: [d/2, d]

  static SqanParams init(std::size_t d, std::size_t steps, ParamFactory& factory);
  void collect(const std::string& prefix, NamedParams& out) const;
  std::size_t steps() const { return w_step.size(); }
};

struct PhraseSet {
  Tensor phrases;  // [d, N], column n is e^(n)
  Tensor attn;     // A: [L, N], column n is the word attention of step n
};

// Extracts `steps` phrase features from word features E [d, L] and sentence
// feature q [d, 1], each step conditioned on the previous phrase (the first
// on a zero vector).
PhraseSet extract_phrases(const Tensor& words, const Tensor& sentence, const SqanParams& params,
                          std::size_t steps);

}  // namespace lgi
