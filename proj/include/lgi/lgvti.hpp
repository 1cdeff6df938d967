// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "lgi/params.hpp"
#include "lgi/scorer.hpp"
#include "lgi/tensor.hpp"

// Local-global video-text interaction: per-phrase segment fusion, local
// context, phrase-attentive pooling and global context.
namespace lgi {

enum class FusionKind { kHadamard, kAddition, kConcat };
enum class LocalKind { kResBlock, kMaskedNl, kNone };
enum class Ordering { kFusionLocalGlobal, kLocalFusionGlobal, kLocalGlobalFusion };

struct FusionStepParams {
  Tensor w_m;    // [d, d]
  Tensor w_s;    // [d, d]
  Tensor w_e;    // [d, d]
  Tensor w_cat;  // [d, 2d], concat fusion only
};

struct FusionParams {
  FusionKind kind = FusionKind::kHadamard;
  std::vector<FusionStepParams> steps;

  static FusionParams init(std::size_t d, std::size_t steps, FusionKind kind,
                           ParamFactory& factory);
  void collect(const std::string& prefix, NamedParams& out) const;
};

struct NlBlockParams {
  Tensor w_rq;
  Tensor w_rk;
  Tensor w_rv;

  static NlBlockParams init(std::size_t d, ParamFactory& factory);
  void collect(const std::string& prefix, NamedParams& out) const;
};

struct ResBlockParams {
  Tensor conv1_w;  // [d, d, k]
  Tensor conv1_b;  // [d, 1]
  Tensor conv2_w;
  Tensor conv2_b;
};

struct LocalContextParams {
  LocalKind kind = LocalKind::kResBlock;
  std::size_t kernel = 15;
  std::size_t window = 31;
  ResBlockParams res;
  std::vector<NlBlockParams> masked;

  static LocalContextParams init(std::size_t d, LocalKind kind, std::size_t kernel,
                                 std::size_t window, std::size_t blocks, ParamFactory& factory);
  void collect(const std::string& prefix, NamedParams& out) const;
};

struct GlobalContextParams {
  ScorerParams phrase_scorer;  // MLP_satt; undefined when there is a single sentence feature
  std::vector<NlBlockParams> blocks;

  void collect(const std::string& prefix, NamedParams& out) const;
};

struct LgvtiParams {
  FusionParams fusion;
  LocalContextParams local;
  GlobalContextParams global;
};

// Fuses every segment column of S [d, T] with one phrase e [d, 1].
Tensor fuse_segments(const Tensor& segments, const Tensor& phrase, const FusionStepParams& params,
                     FusionKind kind);

// [T, T] additive mask allowing |i - j| <= (window - 1) / 2.
Tensor window_mask(std::size_t steps, std::size_t window);

// Row-stochastic attention of one non-local block: entry (i, j) weights key
// position j for query position i. `mask` may be undefined.
Tensor nl_attention(const Tensor& x, const NlBlockParams& params, const Tensor& mask = {});
// x + (W_rv x) P^T with P = nl_attention(x).
Tensor nl_block(const Tensor& x, const NlBlockParams& params, const Tensor& mask = {});

Tensor local_context(const Tensor& x, const LocalContextParams& params);

struct PooledSegments {
  Tensor pooled;   // R~: [d, T]
  Tensor weights;  // c: [1, N]
};

// Convex combination of the per-phrase features weighted by
// softmax(MLP_satt(phrases)). Without a scorer N must be 1.
PooledSegments pool_phrases(std::span<const Tensor> per_phrase, const Tensor& phrases,
                            const ScorerParams& scorer);

Tensor global_context(const Tensor& x, const GlobalContextParams& params);

struct LgvtiOutput {
  Tensor segments;      // R: [d, T]
  Tensor pool_weights;  // c: [1, N]
};

// `phrases` is [d, N]: SQAN phrases, or the sentence feature q as a single
// column for the sentence-only variant.
LgvtiOutput lgvti_forward(const Tensor& segments, const Tensor& phrases, const LgvtiParams& params,
                          Ordering ordering);

}  // namespace lgi
