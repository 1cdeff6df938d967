// SPDX-License-Identifier: Apache-2.0
#include "lgi/gradcheck_suite.hpp"

#include <array>
#include <cmath>
#include <functional>
#include <random>

#include "lgi/grad_check.hpp"
#include "lgi/lgvti.hpp"
#include "lgi/losses.hpp"
#include "lgi/ops.hpp"

namespace lgi {
namespace {

using Inputs = std::vector<Tensor>;

struct Probe {
  const char* name;
  std::vector<Shape> shapes;
  std::function<Tensor(const Inputs&)> op;
  // Optional remap of a raw N(0,1) draw, e.g. to keep it off a kink.
  double (*remap)(double) = nullptr;
};

double off_kink(double x) { return std::abs(x) < 0.05 ? (x < 0 ? x - 0.1 : x + 0.1) : x; }
double positive(double x) { return 0.1 + std::abs(x); }
double off_unit_kink(double x) {
  const double y = 1.5 * x;
  return std::abs(std::abs(y) - 1.0) < 0.05 ? y * 1.1 : y;
}

Tensor random_tensor(const Shape& shape, std::mt19937_64& rng, bool leaf, double (*remap)(double)) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> v(shape_size(shape));
  for (double& x : v) x = remap ? remap(normal(rng)) : normal(rng);
  return Tensor(shape, std::move(v), leaf);
}

std::vector<Probe> probes() {
  static const std::vector<int> kRows = {2, 0, 3, 2};
  static const Tensor kMask = [] {
    std::vector<double> m(3 * 4, 0.0);
    m[1] = m[6] = m[7] = m[11] = kMaskedLogit;
    return Tensor({3, 4}, std::move(m));
  }();
  return {
      {"matmul", {{3, 4}, {4, 2}}, [](const Inputs& x) { return ops::matmul(x[0], x[1]); }},
      {"transpose", {{3, 4}}, [](const Inputs& x) { return ops::transpose(x[0]); }},
      {"add", {{3, 4}, {3, 4}}, [](const Inputs& x) { return ops::add(x[0], x[1]); }},
      {"add_bias", {{3, 4}, {3, 1}}, [](const Inputs& x) { return ops::add(x[0], x[1]); }},
      {"sub", {{3, 4}, {3, 4}}, [](const Inputs& x) { return ops::sub(x[0], x[1]); }},
      {"hadamard", {{3, 4}, {3, 4}}, [](const Inputs& x) { return ops::hadamard(x[0], x[1]); }},
      {"concat_rows", {{2, 3}, {4, 3}},
       [](const Inputs& x) { return ops::concat(std::span<const Tensor>(x), 0); }},
      {"concat_cols", {{3, 2}, {3, 1}},
       [](const Inputs& x) { return ops::concat(std::span<const Tensor>(x), 1); }},
      {"relu", {{3, 4}}, [](const Inputs& x) { return ops::relu(x[0]); }, off_kink},
      {"tanh", {{3, 4}}, [](const Inputs& x) { return ops::tanh(x[0]); }},
      {"sigmoid", {{3, 4}}, [](const Inputs& x) { return ops::sigmoid(x[0]); }},
      {"abs", {{3, 4}}, [](const Inputs& x) { return ops::abs(x[0]); }, off_kink},
      {"smooth_l1", {{3, 4}}, [](const Inputs& x) { return ops::smooth_l1(x[0]); }, off_unit_kink},
      {"log_floor", {{3, 4}}, [](const Inputs& x) { return ops::log_floor(x[0]); }, positive},
      {"softmax", {{3, 4}}, [](const Inputs& x) { return ops::softmax_rows(x[0]); }},
      {"softmax_masked", {{3, 4}}, [](const Inputs& x) { return ops::softmax_rows(x[0], kMask); }},
      {"sum_axis0", {{3, 4}}, [](const Inputs& x) { return ops::sum(x[0], 0); }},
      {"sum_axis1", {{3, 4}}, [](const Inputs& x) { return ops::sum(x[0], 1); }},
      {"mean_axis0", {{3, 4}}, [](const Inputs& x) { return ops::mean(x[0], 0); }},
      {"mean_axis1", {{3, 4}}, [](const Inputs& x) { return ops::mean(x[0], 1); }},
      {"sum_all", {{3, 4}}, [](const Inputs& x) { return ops::sum_all(x[0]); }},
      {"sq_frobenius", {{3, 4}}, [](const Inputs& x) { return ops::sq_frobenius(x[0]); }},
      {"scale", {{3, 4}}, [](const Inputs& x) { return ops::scale(x[0], -1.7); }},
      {"embedding_rows", {{4, 3}}, [](const Inputs& x) { return ops::embedding_rows(x[0], kRows); }},
      {"conv1d_same", {{3, 5}, {2, 3, 3}, {2}},
       [](const Inputs& x) { return ops::conv1d_same(x[0], x[1], x[2]); }},
      {"broadcast_cols", {{3, 1}}, [](const Inputs& x) { return ops::broadcast_cols(x[0], 4); }},
      {"slice_cols", {{3, 5}}, [](const Inputs& x) { return ops::slice_cols(x[0], 1, 3); }},
      {"reshape", {{3, 4}}, [](const Inputs& x) { return ops::reshape(x[0], {2, 6}); }},
  };
}

}  // namespace

std::vector<GradCheckCase> check_primitives(std::size_t points, std::uint64_t seed, double eps) {
  std::mt19937_64 rng(seed);
  std::vector<GradCheckCase> out;
  for (const Probe& probe : probes()) {
    GradCheckCase result{probe.name};
    for (std::size_t point = 0; point < points; ++point) {
      std::vector<Tensor> leaves;
      for (const Shape& s : probe.shapes) leaves.push_back(random_tensor(s, rng, true, probe.remap));
      Tensor weights;
      {
        NoGradGuard no_grad;
        weights = random_tensor(probe.op(leaves).shape(), rng, false, nullptr);
      }
      const GradCheckReport report = grad_check(
          [&] { return ops::sum_all(ops::hadamard(probe.op(leaves), weights)); }, leaves, eps);
      result.max_rel_error = std::max(result.max_rel_error, report.max_rel_error);
      result.coords += report.coords;
    }
    out.push_back(result);
  }
  return out;
}

std::vector<std::pair<std::string, ModelConfig>> model_check_configs(const ModelCheckShape& shape) {
  ModelConfig base;
  base.d = shape.d;
  base.d_v = 5;
  base.segments = shape.segments;
  base.phrases = shape.phrases;
  base.vocab_size = 9;
  base.kernel = 3;
  base.window = 3;
  base.global_blocks = 1;

  std::vector<std::pair<std::string, ModelConfig>> configs;
  auto add = [&](std::string name, auto&& edit) {
    ModelConfig c = base;
    edit(c);
    configs.emplace_back(std::move(name), c);
  };
  for (Variant v : {Variant::kLgi, Variant::kLgiSqan}) {
    for (FusionKind f : {FusionKind::kHadamard, FusionKind::kAddition, FusionKind::kConcat}) {
      for (LocalKind l : {LocalKind::kResBlock, LocalKind::kMaskedNl}) {
        add(std::string(to_string(v)) + "/" + std::string(to_string(f)) + "/" +
                std::string(to_string(l)),
            [&](ModelConfig& c) {
              c.variant = v;
              c.fusion = f;
              c.local = l;
            });
      }
    }
  }
  for (Ordering o : {Ordering::kLocalFusionGlobal, Ordering::kLocalGlobalFusion}) {
    add("lgi/hadamard/resblock/" + std::string(to_string(o)), [&](ModelConfig& c) { c.ordering = o; });
  }
  add("lgi/hadamard/resblock/no_position/masked_segments", [](ModelConfig& c) {
    c.position_embedding = false;
    c.mask_invalid = true;
  });
  return configs;
}

GradCheckCase check_model(const std::string& name, const ModelConfig& config, std::size_t words,
                          std::uint64_t seed, double eps) {
  std::mt19937_64 rng(seed);
  ModelParams params = ModelParams::init(config, seed);
  NamedParams named = params.named();
  std::vector<Tensor> leaves;
  for (const auto& p : named) leaves.push_back(p.tensor);

  std::uniform_int_distribution<int> token(2, static_cast<int>(config.vocab_size) - 1);
  std::vector<int> tokens(words);
  for (int& t : tokens) t = token(rng);
  const Tensor video = random_tensor({config.d_v, config.segments}, rng, false, nullptr);
  // The last segment is padding so the masked path is exercised.
  std::vector<std::uint8_t> valid(config.segments, 1);
  if (config.mask_invalid && !valid.empty()) valid[valid.size() - 1] = 0;
  const Interval truth{0.2, 0.7};
  const LossOptions options{0.3, true, true};

  const auto loss = [&] {
    const ForwardOutput out = forward(params, config, {tokens, video, valid});
    return total_loss(out.prediction.raw, out.prediction.attention, out.phrases.attn, truth, options)
        .total;
  };
  const GradCheckReport report = grad_check(loss, leaves, eps);
  return {name, report.max_rel_error, report.coords};
}

std::vector<GradCheckCase> check_models(const ModelCheckShape& shape, std::uint64_t seed, double eps) {
  std::vector<GradCheckCase> out;
  std::uint64_t offset = 0;
  for (const auto& [name, config] : model_check_configs(shape)) {
    out.push_back(check_model(name, config, shape.words, seed + offset++, eps));
  }
  return out;
}

}  // namespace lgi
