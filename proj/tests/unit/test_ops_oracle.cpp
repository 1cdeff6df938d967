// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <random>

#include "lgi/gradcheck_suite.hpp"
#include "lgi/ops.hpp"
#include "oracles.hpp"

namespace lgi {
namespace {

TEST(Conv1d, MatchesTripleLoop) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t d = 1 + rng() % 4, d_out = 1 + rng() % 4, steps = 1 + rng() % 9;
    const std::size_t k = 2 * (rng() % 4) + 1;
    Tensor seq = oracle::random_tensor({d, steps}, rng);
    Tensor ker = oracle::random_tensor({d_out, d, k}, rng);
    Tensor bias = oracle::random_tensor({d_out}, rng);
    Tensor y = ops::conv1d_same(seq, ker, bias);
    const auto want = oracle::conv1d({seq.data().begin(), seq.data().end()}, d, steps,
                                     {ker.data().begin(), ker.data().end()}, d_out, k,
                                     {bias.data().begin(), bias.data().end()});
    ASSERT_EQ(y.size(), want.size());
    for (std::size_t i = 0; i < want.size(); ++i) EXPECT_NEAR(y.data()[i], want[i], 1e-12);
  }
}

TEST(Primitives, GradientsMatchFiniteDifferences) {
  for (const auto& c : check_primitives(5, 21, 1e-5)) {
    EXPECT_LT(c.max_rel_error, 1e-4) << c.name;
    EXPECT_GT(c.coords, 0u) << c.name;
  }
}

}  // namespace
}  // namespace lgi
