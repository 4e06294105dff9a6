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
#include <vector>

#include "horizon/scene.hpp"

namespace horizon {

inline constexpr std::size_t kDefaultDenseLimit = 8192;

// Packed bit vector; bit n lives at bytes()[n / 8], bit position n % 8.
class Bitmap {
public:
    Bitmap() = default;
    explicit Bitmap(std::size_t nbits) : nbits_(nbits), bytes_((nbits + 7) / 8, 0) {}

    static Bitmap from_bytes(std::size_t nbits, std::vector<std::uint8_t> bytes);

    std::size_t size() const { return nbits_; }

    bool get(std::size_t i) const { return (bytes_[i / 8] >> (i % 8)) & 1u; }

    void set(std::size_t i, bool value = true) {
        const std::uint8_t bit = static_cast<std::uint8_t>(1u << (i % 8));
        if (value) {
            bytes_[i / 8] |= bit;
        } else {
            bytes_[i / 8] &= static_cast<std::uint8_t>(~bit);
        }
    }

    std::size_t count() const;

    const std::vector<std::uint8_t>& bytes() const { return bytes_; }

    bool operator==(const Bitmap& other) const {
        return nbits_ == other.nbits_ && bytes_ == other.bytes_;
    }

private:
    std::size_t nbits_ = 0;
    std::vector<std::uint8_t> bytes_;
};

// Binary attention visibility relation over the token sequence, stored as
// block rules plus one bitmap per reference over the noise patches:
//   - text rows and columns: visible against everything
//   - noise x noise: visible
//   - ref(i) x ref(i): visible
//   - ref(i) x ref(j), i != j: blocked
//   - ref(i) x noise patch n (both directions): bitmap i, bit n
// Storage is O(L + N * noise_patches); the relation is symmetric with an
// all-ones diagonal by construction.
class HorizonMask {
public:
    HorizonMask() = default;
    HorizonMask(TokenLayout layout, std::vector<Bitmap> ref_visibility);

    const TokenLayout& layout() const { return layout_; }
    std::size_t total_len() const { return layout_.total_len(); }
    std::size_t num_refs() const { return ref_visibility_.size(); }

    const Bitmap& ref_visibility(std::size_t ref) const { return ref_visibility_[ref]; }

    bool ref_sees_patch(std::size_t ref, std::size_t patch) const {
        return ref_visibility_[ref].get(patch);
    }

    // Visibility of key k from query q. O(1).
    bool visible(std::size_t q, std::size_t k) const {
        const std::int32_t sq = segment_of_[q];
        const std::int32_t sk = segment_of_[k];
        if (sq == kText || sk == kText) return true;
        if (sq == kNoise) {
            if (sk == kNoise) return true;
            return ref_visibility_[static_cast<std::size_t>(sk)].get(q - layout_.noise_start());
        }
        // q is a reference token
        if (sk == kNoise) {
            return ref_visibility_[static_cast<std::size_t>(sq)].get(k - layout_.noise_start());
        }
        return sq == sk;
    }

    // Noise patch indices visible to a reference, ascending.
    std::vector<std::int32_t> visible_patch_indices(std::size_t ref) const;

    bool operator==(const HorizonMask& other) const {
        return layout_ == other.layout_ && ref_visibility_ == other.ref_visibility_;
    }

private:
    static constexpr std::int32_t kText = -1;
    static constexpr std::int32_t kNoise = -2;

    TokenLayout layout_;
    std::vector<Bitmap> ref_visibility_;
    std::vector<std::int32_t> segment_of_; // kText, kNoise, or ref index per token
};

// Membership rule: the patch counts as inside the box iff the cell/box
// intersection has strictly positive area. The cell is half-open, the box
// closed, so boundary contact alone does not qualify.
bool patch_in_box(const Rect& cell, const BoundingBox& box);

// Builds the visibility relation for a scene. Throws Error{InvalidSpec} when
// the layout was not derived from this scene.
HorizonMask build_horizon_mask(const TokenLayout& layout, const SceneSpec& spec);

// L x L row-major matrix of 0/1 bytes. Throws Error{DenseTooLarge} when L
// exceeds dense_limit.
std::vector<std::uint8_t> materialize_dense(const HorizonMask& mask,
                                            std::size_t dense_limit = kDefaultDenseLimit);

struct VisibilityStats {
    double ones_fraction = 0.0;
    std::vector<std::uint64_t> per_ref_patch_counts;
};

// Counts visible entries from the block structure alone, without
// materializing the dense matrix.
VisibilityStats visibility_stats(const HorizonMask& mask);

} // namespace horizon
