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

#include "horizon/matrix.hpp"
#include "horizon/scene.hpp"

namespace horizon {

inline constexpr double kDefaultRotaryBase = 10000.0;

// Per-token 2-D position ids. Noise patch (r, c) carries (r, c); reference
// grids are placed at diagonal offsets past the noise grid so that no two
// tokens from the noise grid or from different references share both ids;
// text tokens all carry (0, 0).
struct PositionIds {
    std::vector<std::int32_t> row_ids;
    std::vector<std::int32_t> col_ids;

    std::size_t size() const { return row_ids.size(); }

    static PositionIds zeros(std::size_t n) {
        PositionIds ids;
        ids.row_ids.assign(n, 0);
        ids.col_ids.assign(n, 0);
        return ids;
    }
};

// Assigns ids with cumulative diagonal offsets: reference 0 starts at
// (noise_h, noise_w) and each subsequent reference starts where the previous
// grid ended on both axes.
PositionIds assign_position_ids(const TokenLayout& layout, const SceneSpec& spec);

// Axial rotary rotation of per-token head vectors (rows of qk). The first
// half of each vector rotates by row_id, the second by col_id; within a half,
// adjacent component pairs (2j, 2j+1) rotate at frequency base^(-2j/half).
// head_dim must be divisible by 4. Norm-preserving; relative positions only.
Matrix apply_rotary(const Matrix& qk, const PositionIds& ids, double base = kDefaultRotaryBase);

} // namespace horizon
