// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "lgi/errors.hpp"
#include "lgi/grad_check.hpp"
#include "lgi/ops.hpp"
#include "lgi/tensor.hpp"

namespace lgi {
namespace {

std::vector<double> values(const Tensor& t) { return {t.data().begin(), t.data().end()}; }

TEST(Tensor, ConstructionChecksSize) {
  EXPECT_THROW(Tensor({2, 3}, std::vector<double>(5)), ShapeMismatch);
  Tensor t({2, 3}, {1, 2, 3, 4, 5, 6});
  EXPECT_EQ(t.size(), 6u);
  EXPECT_DOUBLE_EQ(t.at(1, 2), 6.0);
  EXPECT_TRUE(t.is_leaf());
}

TEST(Tensor, SoftmaxUniform) {
  Tensor p = ops::softmax_rows(Tensor({1, 4}, {0, 0, 0, 0}));
  for (double v : p.data()) EXPECT_DOUBLE_EQ(v, 0.25);
}

TEST(Tensor, SoftmaxMaskExcludesEntry) {
  Tensor p = ops::softmax_rows(Tensor({1, 2}, {1, 2}), Tensor({1, 2}, {0, kMaskedLogit}));
  EXPECT_EQ(values(p), (std::vector<double>{1.0, 0.0}));
}

TEST(Tensor, SoftmaxRejectsBadMask) {
  EXPECT_THROW(ops::softmax_rows(Tensor({1, 2}, {1, 2}), Tensor({1, 2}, {0, -5})), InvalidArgument);
  EXPECT_THROW(ops::softmax_rows(Tensor({1, 2}, {1, 2}), Tensor({1, 3}, {0, 0, 0})), ShapeMismatch);
}

TEST(Tensor, SoftmaxRowsSumToOne) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n(0.0, 10.0);
  std::vector<double> v(5 * 7);
  for (double& x : v) x = n(rng);
  Tensor p = ops::softmax_rows(Tensor({5, 7}, v));
  for (std::size_t r = 0; r < 5; ++r) {
    double total = 0.0;
    for (std::size_t c = 0; c < 7; ++c) {
      EXPECT_GE(p.at(r, c), 0.0);
      total += p.at(r, c);
    }
    EXPECT_NEAR(total, 1.0, 1e-12);
  }
}

TEST(Tensor, Hadamard) {
  Tensor h = ops::hadamard(Tensor({3}, {1, 2, 3}), Tensor({3}, {4, 5, 6}));
  EXPECT_EQ(values(h), (std::vector<double>{4, 10, 18}));
}

TEST(Tensor, ShapeErrors) {
  EXPECT_THROW(ops::matmul(Tensor::zeros({2, 3}), Tensor::zeros({2, 3})), ShapeMismatch);
  EXPECT_THROW(ops::add(Tensor::zeros({2, 3}), Tensor::zeros({3, 2})), ShapeMismatch);
  EXPECT_THROW(ops::hadamard(Tensor::zeros({2}), Tensor::zeros({3})), ShapeMismatch);
  EXPECT_THROW(ops::sum(Tensor::zeros({2, 0}), 1), EmptyAxis);
}

TEST(Tensor, BiasAddBroadcastsOverColumns) {
  Tensor y = ops::add(Tensor({2, 2}, {1, 2, 3, 4}), Tensor({2}, {10, 20}));
  EXPECT_EQ(values(y), (std::vector<double>{11, 12, 23, 24}));
}

TEST(Conv1d, HandExample) {
  Tensor y = ops::conv1d_same(Tensor({1, 3}, {1, 2, 3}), Tensor({1, 1, 3}, {1, 1, 1}), Tensor({1}, {0}));
  EXPECT_EQ(values(y), (std::vector<double>{3, 6, 5}));
}

TEST(Conv1d, IdentityKernel) {
  Tensor seq({2, 4}, {1, -2, 3, 0.5, 4, 5, -6, 7});
  std::vector<double> k(2 * 2 * 5, 0.0);
  k[0 * 10 + 0 * 5 + 2] = 1.0;
  k[1 * 10 + 1 * 5 + 2] = 1.0;
  Tensor y = ops::conv1d_same(seq, Tensor({2, 2, 5}, k), Tensor::zeros({2}));
  EXPECT_EQ(values(y), values(seq));
}

TEST(Conv1d, ZeroKernel) {
  Tensor y = ops::conv1d_same(Tensor::full({3, 4}, 2.0), Tensor::zeros({5, 3, 3}), Tensor::zeros({5}));
  EXPECT_EQ(y.shape(), (Shape{5, 4}));
  for (double v : y.data()) EXPECT_EQ(v, 0.0);
}

TEST(Conv1d, EvenKernelRejected) {
  EXPECT_THROW(ops::conv1d_same(Tensor::zeros({1, 3}), Tensor::zeros({1, 1, 2}), Tensor::zeros({1})),
               EvenKernel);
}

TEST(Backward, SumGivesOnes) {
  Tensor x = Tensor::full({2, 3}, 0.7, true);
  backward(ops::sum_all(x));
  for (double g : x.grad()) EXPECT_EQ(g, 1.0);
}

TEST(Backward, Square) {
  Tensor x({2}, {1, -2}, true);
  backward(ops::sum_all(ops::hadamard(x, x)));
  EXPECT_EQ(std::vector<double>(x.grad().begin(), x.grad().end()), (std::vector<double>{2, -4}));
}

TEST(Backward, NonScalarRejected) {
  Tensor x = Tensor::full({2}, 1.0, true);
  EXPECT_THROW(backward(ops::scale(x, 2.0)), NonScalarLoss);
  Tape::current().clear();
}

TEST(Backward, FanOutAccumulates) {
  // f(x) = sum(tanh(x) * x) reuses x along two paths; compare with two
  // independent copies whose gradients are summed.
  Tensor x({3}, {0.3, -1.2, 2.0}, true);
  backward(ops::sum_all(ops::hadamard(ops::tanh(x), x)));
  Tensor a({3}, {0.3, -1.2, 2.0}, true);
  Tensor b({3}, {0.3, -1.2, 2.0}, true);
  backward(ops::sum_all(ops::hadamard(ops::tanh(a), b)));
  for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(x.grad()[i], a.grad()[i] + b.grad()[i], 1e-15);
}

TEST(Backward, GradientsAccumulateAcrossCalls) {
  Tensor x = Tensor::full({2}, 1.0, true);
  backward(ops::sum_all(x));
  backward(ops::sum_all(x));
  for (double g : x.grad()) EXPECT_EQ(g, 2.0);
  x.zero_grad();
  EXPECT_FALSE(x.has_grad());
}

TEST(Tape, TopologicalAndClearedAfterBackward) {
  Tensor x = Tensor::full({2, 2}, 0.5, true);
  Tensor y = ops::tanh(ops::matmul(x, x));
  EXPECT_TRUE(Tape::current().is_topologically_ordered());
  EXPECT_EQ(Tape::current().size(), 2u);
  backward(ops::sum_all(y));
  EXPECT_EQ(Tape::current().size(), 0u);
}

TEST(Tape, StaleIntermediateRejected) {
  Tensor x = Tensor::full({2}, 0.5, true);
  Tensor y = ops::tanh(x);
  backward(ops::sum_all(y));
  EXPECT_THROW(ops::sum_all(y), std::logic_error);
  Tape::current().clear();
}

TEST(Tape, NoGradGuardSkipsRecording) {
  Tensor x = Tensor::full({2}, 0.5, true);
  {
    NoGradGuard guard;
    Tensor y = ops::tanh(x);
    EXPECT_FALSE(y.requires_grad());
  }
  EXPECT_EQ(Tape::current().size(), 0u);
}

TEST(GradCheck, Quadratic) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> n;
  std::vector<double> v(6);
  for (double& x : v) x = n(rng);
  const double err = grad_check([](const Tensor& x) { return ops::sq_frobenius(x); },
                                Tensor({6}, v, true), 1e-5);
  EXPECT_LT(err, 1e-6);
}

TEST(GradCheck, SoftmaxFirstComponent) {
  const double err = grad_check(
      [](const Tensor& x) { return ops::slice_cols(ops::softmax_rows(x), 0, 1); },
      Tensor({1, 2}, {0.3, -0.7}, true), 1e-5);
  EXPECT_LT(err, 1e-5);
}

TEST(GradCheck, RejectsBadEps) {
  auto f = [](const Tensor& x) { return ops::sum_all(x); };
  EXPECT_THROW(grad_check(f, Tensor({1}, {1.0}, true), 1e-2), InvalidArgument);
  EXPECT_THROW(grad_check(f, Tensor({1}, {1.0}, true), 1e-9), InvalidArgument);
}

TEST(GradCheck, NonFiniteProbe) {
  auto f = [](const Tensor& x) { return ops::sum_all(ops::scale(x, 1e10)); };
  EXPECT_THROW(grad_check(f, Tensor({1}, {1e300}, true), 1e-5), NonFiniteValue);
}

}  // namespace
}  // namespace lgi
