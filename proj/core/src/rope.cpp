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

#include "horizon/rope.hpp"

#include <cmath>
#include <string>

namespace horizon {

PositionIds assign_position_ids(const TokenLayout& layout, const SceneSpec& spec) {
    if (layout.num_refs() != spec.refs.size() || layout.noise_h() != spec.noise_h ||
        layout.noise_w() != spec.noise_w ||
        layout.text_len() != static_cast<std::size_t>(spec.text_len)) {
        throw Error(ErrorKind::InvalidSpec, "layout does not match the scene spec");
    }

    PositionIds ids = PositionIds::zeros(layout.total_len());

    const std::size_t noise_start = layout.noise_start();
    for (std::size_t n = 0; n < layout.noise_len(); ++n) {
        ids.row_ids[noise_start + n] = static_cast<std::int32_t>(n / spec.noise_w);
        ids.col_ids[noise_start + n] = static_cast<std::int32_t>(n % spec.noise_w);
    }

    std::int32_t off_h = spec.noise_h;
    std::int32_t off_w = spec.noise_w;
    for (std::size_t i = 0; i < spec.refs.size(); ++i) {
        const ReferenceSpec& ref = spec.refs[i];
        const Segment& seg = layout.ref_segment(i);
        for (std::size_t n = 0; n < seg.len; ++n) {
            ids.row_ids[seg.start + n] = off_h + static_cast<std::int32_t>(n / ref.grid_w);
            ids.col_ids[seg.start + n] = off_w + static_cast<std::int32_t>(n % ref.grid_w);
        }
        off_h += ref.grid_h;
        off_w += ref.grid_w;
    }
    return ids;
}

Matrix apply_rotary(const Matrix& qk, const PositionIds& ids, double base) {
    const std::size_t dim = qk.cols;
    if (dim == 0 || dim % 4 != 0) {
        throw Error(ErrorKind::BadDimension,
                    "head dim " + std::to_string(dim) + " must be a positive multiple of 4");
    }
    if (ids.size() != qk.rows) {
        throw Error(ErrorKind::ShapeMismatch, "one position id pair per token required");
    }

    const std::size_t half = dim / 2;
    const std::size_t pairs = half / 2;
    std::vector<double> inv_freq(pairs);
    for (std::size_t j = 0; j < pairs; ++j) {
        inv_freq[j] = std::pow(base, -2.0 * static_cast<double>(j) / static_cast<double>(half));
    }

    Matrix out(qk.rows, qk.cols);
    for (std::size_t t = 0; t < qk.rows; ++t) {
        const double* src = qk.row(t);
        double* dst = out.row(t);
        const double pos[2] = {static_cast<double>(ids.row_ids[t]),
                               static_cast<double>(ids.col_ids[t])};
        for (int axis = 0; axis < 2; ++axis) {
            const std::size_t off = axis == 0 ? 0 : half;
            for (std::size_t j = 0; j < pairs; ++j) {
                const double angle = pos[axis] * inv_freq[j];
                const double c = std::cos(angle);
                const double s = std::sin(angle);
                const double x = src[off + 2 * j];
                const double y = src[off + 2 * j + 1];
                dst[off + 2 * j] = x * c - y * s;
                dst[off + 2 * j + 1] = x * s + y * c;
            }
        }
    }
    return out;
}

} // namespace horizon
