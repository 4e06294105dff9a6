// Copyright 2026 The Horizon Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>

#include "horizon/mask.hpp"
#include "horizon/matrix.hpp"
#include "horizon/rope.hpp"
#include "horizon/scene.hpp"

namespace horizon {

inline constexpr int kDefaultWidth = 64;
inline constexpr int kDefaultNumHeads = 4;

struct AttentionConfig {
    int head_dim = 16;
    int num_heads = 4;

    int width() const { return head_dim * num_heads; }
    double scale() const;

    // head_dim must be even and at least 4; num_heads positive.
    void validate() const;
};

// Token sequence content: one row per token, conforming to a layout. Rows for
// noise and references come from the seeded synthetic embedder.
struct TokenTensor {
    Matrix values;
    TokenLayout layout;
};

// Masked scaled-dot-product attention for one head, reference path. Computes
// every query/key logit, then softmaxes over the visible keys only; blocked
// keys never enter the softmax, which matches an additive log-mask exactly
// while keeping extreme logits finite. Throws Error{ShapeMismatch} on
// inconsistent shapes, Error{AllMaskedRow} if a query sees no key.
Matrix masked_attention_dense(const Matrix& q, const Matrix& k, const Matrix& v,
                              const HorizonMask& mask, const AttentionConfig& cfg);

// Fast path: identical semantics, but iterates (query segment x key segment)
// blocks, skipping blocked reference pairs and consulting the visibility
// bitmaps only for reference/noise blocks. Never materializes an L x L mask.
// Keys are visited in the same ascending order as the dense path, so outputs
// agree with it to the last bit.
Matrix masked_attention_block_sparse(const Matrix& q, const Matrix& k, const Matrix& v,
                                     const HorizonMask& mask, const AttentionConfig& cfg);

enum class AttentionPath { Dense, BlockSparse };

// Toy double-stream block: shared QKV projections, rotary on Q/K, masked
// multi-head attention, output projection, residual, then a per-token
// two-layer MLP with residual. Parameters are deterministic functions of a
// seed so tests carry no stored weights.
struct DoubleStreamParams {
    AttentionConfig attn;
    int hidden = 0;
    Matrix w_q, w_k, w_v, w_o; // width x width
    Matrix w_mlp1;             // width x hidden
    Matrix w_mlp2;             // hidden x width
    double rotary_base = kDefaultRotaryBase;

    static DoubleStreamParams seeded(std::uint64_t seed, int width = kDefaultWidth,
                                     int num_heads = kDefaultNumHeads);
    static DoubleStreamParams zeros(int width = kDefaultWidth, int num_heads = kDefaultNumHeads);
};

TokenTensor double_stream_forward(const TokenTensor& tokens, const HorizonMask& mask,
                                  const PositionIds& ids, const DoubleStreamParams& params,
                                  AttentionPath path = AttentionPath::BlockSparse);

TokenTensor double_stream_forward(const TokenTensor& tokens, const HorizonMask& mask,
                                  const PositionIds& ids, std::uint64_t params_seed,
                                  AttentionPath path = AttentionPath::BlockSparse);

// Seeded stand-in for encoded text/noise/reference content: unit-variance
// pseudo-random rows, reproducible from spec.seed.
TokenTensor synth_tokens(const SceneSpec& spec, int width = kDefaultWidth);

} // namespace horizon
