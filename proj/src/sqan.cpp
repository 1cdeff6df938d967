// SPDX-License-Identifier: Apache-2.0
#include "lgi/sqan.hpp"

#include <array>

#include "lgi/errors.hpp"
#include "lgi/ops.hpp"

namespace lgi {

SqanParams SqanParams::init(std::size_t d, std::size_t steps, ParamFactory& factory) {
  if (steps == 0) throw NInvalid("SQAN needs at least one phrase step");
  SqanParams p;
  p.w_guide = factory.uniform({d, 2 * d}, 2 * d);
  for (std::size_t n = 0; n < steps; ++n) p.w_step.push_back(factory.uniform({d, d}, d));
  p.w_score = factory.uniform({1, d / 2}, d / 2);
  p.w_guide_att = factory.uniform({d / 2, d}, d);
  p.w_word_att = factory.uniform({d / 2, d}, d);
  return p;
}

void SqanParams::collect(const std::string& prefix, NamedParams& out) const {
  append_param(out, prefix + ".w_g", w_guide);
  for (std::size_t n = 0; n < w_step.size(); ++n) {
    append_param(out, prefix + ".w_q" + std::to_string(n + 1), w_step[n]);
  }
  append_param(out, prefix + ".w_qatt", w_score);
  append_param(out, prefix + ".w_galpha", w_guide_att);
  append_param(out, prefix + ".w_walpha", w_word_att);
}

PhraseSet extract_phrases(const Tensor& words, const Tensor& sentence, const SqanParams& params,
                          std::size_t steps) {
  if (steps < 1) throw NInvalid("extract_phrases: N must be at least 1");
  if (steps != params.steps()) {
    throw NInvalid("extract_phrases: N=" + std::to_string(steps) + " but parameters hold " +
                   std::to_string(params.steps()) + " steps");
  }
  if (words.rank() != 2 || sentence.rank() != 2 || sentence.dim(1) != 1 ||
      words.dim(0) != sentence.dim(0)) {
    throw ShapeMismatch("extract_phrases: E " + shape_str(words.shape()) + " and q " +
                        shape_str(sentence.shape()) + " disagree");
  }
  const std::size_t d = words.dim(0);

  // W_walpha w_l does not depend on the step.
  const Tensor word_keys = ops::matmul(params.w_word_att, words);
  Tensor previous = Tensor::zeros({d, 1});
  std::vector<Tensor> phrases, attention;
  for (std::size_t n = 0; n < steps; ++n) {
    const std::array<Tensor, 2> guide_in{ops::matmul(params.w_step[n], sentence), previous};
    Tensor guide = ops::relu(ops::matmul(params.w_guide, ops::concat(guide_in, 0)));
    Tensor hidden = ops::tanh(ops::add(word_keys, ops::matmul(params.w_guide_att, guide)));
    Tensor weights = ops::softmax_rows(ops::matmul(params.w_score, hidden));  // [1, L]
    Tensor weights_col = ops::transpose(weights);
    previous = ops::matmul(words, weights_col);
    phrases.push_back(previous);
    attention.push_back(weights_col);
  }
  return {ops::concat(phrases, 1), ops::concat(attention, 1)};
}

}  // namespace lgi
