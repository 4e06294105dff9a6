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

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "horizon/error.hpp"

namespace horizon {

inline constexpr std::size_t kDefaultMaxSequenceLen = 16384;

// Axis-aligned box in normalized canvas coordinates ([0,1] fractions of the
// noise canvas). Valid boxes have strictly positive area.
struct BoundingBox {
    double x_min = 0.0;
    double y_min = 0.0;
    double x_max = 0.0;
    double y_max = 0.0;

    bool valid() const {
        return 0.0 <= x_min && x_min < x_max && x_max <= 1.0 &&
               0.0 <= y_min && y_min < y_max && y_max <= 1.0;
    }
    double area() const { return (x_max - x_min) * (y_max - y_min); }
};

// Half-open rectangle [x0,x1) x [y0,y1); the canvas cell of one noise patch.
struct Rect {
    double x0 = 0.0;
    double y0 = 0.0;
    double x1 = 0.0;
    double y1 = 0.0;
};

// One reference subject: a grid of latent patches plus the target box where
// the subject must appear on the noise canvas.
struct ReferenceSpec {
    int grid_h = 1;
    int grid_w = 1;
    BoundingBox box;
    std::string category;
};

// Declarative description of one generation scene. text_len is an abstract
// token count; token content is produced by the seeded synthetic embedder.
struct SceneSpec {
    int text_len = 0;
    int noise_h = 1;
    int noise_w = 1;
    std::uint64_t seed = 0;
    std::vector<ReferenceSpec> refs;

    // Throws Error{InvalidSpec} when any invariant is violated.
    void validate() const;

    std::size_t noise_patches() const {
        return static_cast<std::size_t>(noise_h) * static_cast<std::size_t>(noise_w);
    }
    std::size_t total_tokens() const;
};

enum class SegmentKind { Text, Noise, Ref };

struct Segment {
    SegmentKind kind = SegmentKind::Text;
    int ref_index = -1; // 0-based, only meaningful for Ref segments
    std::size_t start = 0;
    std::size_t len = 0;
};

// Index map over the concatenated token sequence: text tokens first, then
// noise patches, then each reference grid in spec order. Zero-length segments
// are omitted.
class TokenLayout {
public:
    TokenLayout() = default;
    TokenLayout(std::vector<Segment> segments, int noise_h, int noise_w);

    const std::vector<Segment>& segments() const { return segments_; }
    std::size_t total_len() const { return total_len_; }

    int noise_h() const { return noise_h_; }
    int noise_w() const { return noise_w_; }

    std::size_t text_len() const { return text_len_; }
    std::size_t text_start() const { return 0; }
    std::size_t noise_start() const { return noise_start_; }
    std::size_t noise_len() const { return noise_len_; }

    std::size_t num_refs() const { return ref_segments_.size(); }
    const Segment& ref_segment(std::size_t i) const { return segments_[ref_segments_[i]]; }

    bool operator==(const TokenLayout& other) const;

private:
    std::vector<Segment> segments_;
    std::vector<std::size_t> ref_segments_; // indices into segments_
    std::size_t total_len_ = 0;
    std::size_t text_len_ = 0;
    std::size_t noise_start_ = 0;
    std::size_t noise_len_ = 0;
    int noise_h_ = 0;
    int noise_w_ = 0;
};

// Derives the token layout for a scene. Throws Error{InvalidSpec} on violated
// spec invariants and Error{SequenceTooLong} when the total token count
// exceeds max_len.
TokenLayout build_layout(const SceneSpec& spec, std::size_t max_len = kDefaultMaxSequenceLen);

// Canvas cell of noise patch n, row-major: r = n / noise_w, c = n % noise_w.
// Throws Error{IndexOutOfRange} when n is not a valid patch index.
Rect patch_cell(const TokenLayout& layout, std::size_t noise_index);

} // namespace horizon
