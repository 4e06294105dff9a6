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

#include "horizon/scene.hpp"

#include <string>

namespace horizon {

const char* to_string(ErrorKind kind) {
    switch (kind) {
    case ErrorKind::InvalidSpec: return "InvalidSpec";
    case ErrorKind::SequenceTooLong: return "SequenceTooLong";
    case ErrorKind::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorKind::DenseTooLarge: return "DenseTooLarge";
    case ErrorKind::BadDimension: return "BadDimension";
    case ErrorKind::ShapeMismatch: return "ShapeMismatch";
    case ErrorKind::AllMaskedRow: return "AllMaskedRow";
    case ErrorKind::EmptyDataset: return "EmptyDataset";
    case ErrorKind::BadPolicy: return "BadPolicy";
    case ErrorKind::SceneIdMismatch: return "SceneIdMismatch";
    case ErrorKind::BadConstraints: return "BadConstraints";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::IoError: return "IoError";
    }
    return "Error";
}

void SceneSpec::validate() const {
    if (text_len < 0) {
        throw Error(ErrorKind::InvalidSpec, "text_len must be >= 0");
    }
    if (noise_h < 1 || noise_w < 1) {
        throw Error(ErrorKind::InvalidSpec, "noise grid must be at least 1x1");
    }
    for (std::size_t i = 0; i < refs.size(); ++i) {
        const ReferenceSpec& r = refs[i];
        if (r.grid_h < 1 || r.grid_w < 1) {
            throw Error(ErrorKind::InvalidSpec,
                        "reference " + std::to_string(i) + " grid must be at least 1x1");
        }
        if (!r.box.valid()) {
            throw Error(ErrorKind::InvalidSpec,
                        "reference " + std::to_string(i) + " box is not a valid normalized box");
        }
    }
}

std::size_t SceneSpec::total_tokens() const {
    std::size_t total = static_cast<std::size_t>(text_len) + noise_patches();
    for (const ReferenceSpec& r : refs) {
        total += static_cast<std::size_t>(r.grid_h) * static_cast<std::size_t>(r.grid_w);
    }
    return total;
}

TokenLayout::TokenLayout(std::vector<Segment> segments, int noise_h, int noise_w)
    : segments_(std::move(segments)), noise_h_(noise_h), noise_w_(noise_w) {
    std::size_t cursor = 0;
    int phase = 0; // 0 before noise, 1 after noise (refs only)
    for (std::size_t i = 0; i < segments_.size(); ++i) {
        const Segment& s = segments_[i];
        if (s.start != cursor || s.len == 0) {
            throw Error(ErrorKind::InvalidSpec, "layout segments must be contiguous and non-empty");
        }
        cursor += s.len;
        switch (s.kind) {
        case SegmentKind::Text:
            if (i != 0) {
                throw Error(ErrorKind::InvalidSpec, "text segment must come first");
            }
            text_len_ = s.len;
            break;
        case SegmentKind::Noise:
            if (phase != 0 || noise_len_ != 0) {
                throw Error(ErrorKind::InvalidSpec, "exactly one noise segment must precede refs");
            }
            phase = 1;
            noise_start_ = s.start;
            noise_len_ = s.len;
            break;
        case SegmentKind::Ref:
            if (phase != 1 || s.ref_index != static_cast<int>(ref_segments_.size())) {
                throw Error(ErrorKind::InvalidSpec,
                            "reference segments must follow noise in index order");
            }
            ref_segments_.push_back(i);
            break;
        }
    }
    total_len_ = cursor;
    if (noise_len_ != static_cast<std::size_t>(noise_h_) * static_cast<std::size_t>(noise_w_)) {
        throw Error(ErrorKind::InvalidSpec, "noise segment length does not match the noise grid");
    }
}

bool TokenLayout::operator==(const TokenLayout& other) const {
    if (total_len_ != other.total_len_ || noise_h_ != other.noise_h_ ||
        noise_w_ != other.noise_w_ || segments_.size() != other.segments_.size()) {
        return false;
    }
    for (std::size_t i = 0; i < segments_.size(); ++i) {
        const Segment& a = segments_[i];
        const Segment& b = other.segments_[i];
        if (a.kind != b.kind || a.ref_index != b.ref_index || a.start != b.start || a.len != b.len) {
            return false;
        }
    }
    return true;
}

TokenLayout build_layout(const SceneSpec& spec, std::size_t max_len) {
    spec.validate();
    const std::size_t total = spec.total_tokens();
    if (total > max_len) {
        throw Error(ErrorKind::SequenceTooLong,
                    std::to_string(total) + " tokens exceed the configured maximum of " +
                        std::to_string(max_len));
    }

    std::vector<Segment> segments;
    std::size_t cursor = 0;
    if (spec.text_len > 0) {
        segments.push_back({SegmentKind::Text, -1, cursor, static_cast<std::size_t>(spec.text_len)});
        cursor += static_cast<std::size_t>(spec.text_len);
    }
    segments.push_back({SegmentKind::Noise, -1, cursor, spec.noise_patches()});
    cursor += spec.noise_patches();
    for (std::size_t i = 0; i < spec.refs.size(); ++i) {
        const std::size_t len = static_cast<std::size_t>(spec.refs[i].grid_h) *
                                static_cast<std::size_t>(spec.refs[i].grid_w);
        segments.push_back({SegmentKind::Ref, static_cast<int>(i), cursor, len});
        cursor += len;
    }
    return TokenLayout(std::move(segments), spec.noise_h, spec.noise_w);
}

Rect patch_cell(const TokenLayout& layout, std::size_t noise_index) {
    if (noise_index >= layout.noise_len()) {
        throw Error(ErrorKind::IndexOutOfRange,
                    "noise patch " + std::to_string(noise_index) + " out of range");
    }
    const std::size_t w = static_cast<std::size_t>(layout.noise_w());
    const std::size_t h = static_cast<std::size_t>(layout.noise_h());
    const std::size_t r = noise_index / w;
    const std::size_t c = noise_index % w;
    Rect cell;
    cell.x0 = static_cast<double>(c) / static_cast<double>(w);
    cell.x1 = static_cast<double>(c + 1) / static_cast<double>(w);
    cell.y0 = static_cast<double>(r) / static_cast<double>(h);
    cell.y1 = static_cast<double>(r + 1) / static_cast<double>(h);
    return cell;
}

} // namespace horizon
