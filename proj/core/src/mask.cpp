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

#include "horizon/mask.hpp"

#include <algorithm>
#include <bit>
#include <string>

namespace horizon {

Bitmap Bitmap::from_bytes(std::size_t nbits, std::vector<std::uint8_t> bytes) {
    if (bytes.size() != (nbits + 7) / 8) {
        throw Error(ErrorKind::ParseError, "bitmap byte count does not match bit count");
    }
    // Trailing bits past nbits must be clear.
    if (nbits % 8 != 0 && !bytes.empty()) {
        const std::uint8_t tail = static_cast<std::uint8_t>(bytes.back() >> (nbits % 8));
        if (tail != 0) {
            throw Error(ErrorKind::ParseError, "bitmap has set bits past its length");
        }
    }
    Bitmap b;
    b.nbits_ = nbits;
    b.bytes_ = std::move(bytes);
    return b;
}

std::size_t Bitmap::count() const {
    std::size_t n = 0;
    for (std::uint8_t byte : bytes_) {
        n += static_cast<std::size_t>(std::popcount(byte));
    }
    return n;
}

HorizonMask::HorizonMask(TokenLayout layout, std::vector<Bitmap> ref_visibility)
    : layout_(std::move(layout)), ref_visibility_(std::move(ref_visibility)) {
    if (ref_visibility_.size() != layout_.num_refs()) {
        throw Error(ErrorKind::InvalidSpec, "one visibility bitmap per reference required");
    }
    for (const Bitmap& b : ref_visibility_) {
        if (b.size() != layout_.noise_len()) {
            throw Error(ErrorKind::InvalidSpec, "visibility bitmap length must equal noise patches");
        }
    }
    segment_of_.assign(layout_.total_len(), kText);
    for (const Segment& s : layout_.segments()) {
        std::int32_t tag = kText;
        if (s.kind == SegmentKind::Noise) tag = kNoise;
        if (s.kind == SegmentKind::Ref) tag = s.ref_index;
        std::fill(segment_of_.begin() + static_cast<std::ptrdiff_t>(s.start),
                  segment_of_.begin() + static_cast<std::ptrdiff_t>(s.start + s.len), tag);
    }
}

std::vector<std::int32_t> HorizonMask::visible_patch_indices(std::size_t ref) const {
    const Bitmap& b = ref_visibility_[ref];
    std::vector<std::int32_t> out;
    out.reserve(b.count());
    for (std::size_t n = 0; n < b.size(); ++n) {
        if (b.get(n)) out.push_back(static_cast<std::int32_t>(n));
    }
    return out;
}

bool patch_in_box(const Rect& cell, const BoundingBox& box) {
    const double overlap_w = std::min(cell.x1, box.x_max) - std::max(cell.x0, box.x_min);
    const double overlap_h = std::min(cell.y1, box.y_max) - std::max(cell.y0, box.y_min);
    return overlap_w > 0.0 && overlap_h > 0.0;
}

HorizonMask build_horizon_mask(const TokenLayout& layout, const SceneSpec& spec) {
    spec.validate();
    if (layout.num_refs() != spec.refs.size() || layout.noise_len() != spec.noise_patches() ||
        layout.text_len() != static_cast<std::size_t>(spec.text_len) ||
        layout.noise_h() != spec.noise_h || layout.noise_w() != spec.noise_w) {
        throw Error(ErrorKind::InvalidSpec, "layout was not derived from this scene spec");
    }
    for (std::size_t i = 0; i < spec.refs.size(); ++i) {
        const std::size_t len = static_cast<std::size_t>(spec.refs[i].grid_h) *
                                static_cast<std::size_t>(spec.refs[i].grid_w);
        if (layout.ref_segment(i).len != len) {
            throw Error(ErrorKind::InvalidSpec, "layout reference segment sizes do not match spec");
        }
    }

    std::vector<Bitmap> bitmaps;
    bitmaps.reserve(spec.refs.size());
    for (const ReferenceSpec& ref : spec.refs) {
        Bitmap b(layout.noise_len());
        for (std::size_t n = 0; n < layout.noise_len(); ++n) {
            if (patch_in_box(patch_cell(layout, n), ref.box)) {
                b.set(n);
            }
        }
        bitmaps.push_back(std::move(b));
    }
    return HorizonMask(layout, std::move(bitmaps));
}

std::vector<std::uint8_t> materialize_dense(const HorizonMask& mask, std::size_t dense_limit) {
    const std::size_t len = mask.total_len();
    if (len > dense_limit) {
        throw Error(ErrorKind::DenseTooLarge,
                    std::to_string(len) + " tokens exceed the dense limit of " +
                        std::to_string(dense_limit));
    }
    std::vector<std::uint8_t> dense(len * len, 0);
    for (std::size_t q = 0; q < len; ++q) {
        for (std::size_t k = 0; k < len; ++k) {
            dense[q * len + k] = mask.visible(q, k) ? 1 : 0;
        }
    }
    return dense;
}

VisibilityStats visibility_stats(const HorizonMask& mask) {
    const TokenLayout& layout = mask.layout();
    const std::uint64_t total = layout.total_len();
    const std::uint64_t text = layout.text_len();
    const std::uint64_t noise = layout.noise_len();

    VisibilityStats stats;
    std::uint64_t ones = text * total;          // text rows see everything
    ones += noise * (text + noise);             // noise rows: text plus all noise
    for (std::size_t i = 0; i < mask.num_refs(); ++i) {
        const std::uint64_t visible = mask.ref_visibility(i).count();
        const std::uint64_t ref_len = layout.ref_segment(i).len;
        ones += ref_len * visible;              // noise rows inside box i see ref i
        ones += ref_len * (text + visible + ref_len); // ref i rows
        stats.per_ref_patch_counts.push_back(visible);
    }
    stats.ones_fraction =
        static_cast<double>(ones) / (static_cast<double>(total) * static_cast<double>(total));
    return stats;
}

} // namespace horizon
