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

#include <string>
#include <vector>

#include "horizon/error.hpp"

namespace horizon {

inline constexpr double kDefaultKeepFraction = 0.245;

// One data pair's similarity channels. clip_i and dino are cosine
// similarities in [-1, 1]; s_vlm and s_ds are judge scores on arbitrary
// finite scales. Only orderings matter downstream.
struct ScoreRecord {
    std::string pair_id;
    double clip_i = 0.0;
    double dino = 0.0;
    double s_vlm = 0.0;
    double s_ds = 0.0;
};

struct RankedRecord {
    std::string pair_id;
    double r_v = 0.0;
    double r_vlm = 0.0;
    double r_ds = 0.0;
    double rank = 0.0; // mean of the three; lower means more similar
};

// Fused visual score: the mean of min-max-normalized clip_i and dino over the
// dataset. A constant channel normalizes to 0.5. Throws Error{EmptyDataset}.
std::vector<double> combine_visual(const std::vector<ScoreRecord>& records);

// Fractional (average) ranks, descending: the largest value gets rank 1, tied
// values receive the mean of the positions they occupy.
std::vector<double> fractional_rank(const std::vector<double>& values);

// Ranks each channel, averages the three ranks per record, and returns the
// records sorted ascending by final rank, ties broken by pair_id. Throws
// Error{EmptyDataset} and Error{InvalidSpec} on duplicate ids or non-finite
// scores.
std::vector<RankedRecord> aggregate(const std::vector<ScoreRecord>& records);

struct SelectionPolicy {
    enum class Kind { TopK, TopFraction, RankThreshold };
    Kind kind = Kind::TopFraction;
    double value = kDefaultKeepFraction;

    // Accepts "top_k=N", "top_fraction=F", "rank_threshold=R", or a bare
    // policy name for its documented default. Throws Error{BadPolicy}.
    static SelectionPolicy parse(const std::string& text);
};

// Kept pair ids, in ranked order. top_k keeps the first k records,
// top_fraction the first floor(fraction * n), rank_threshold every record
// with rank <= value. Throws Error{BadPolicy} on out-of-range parameters.
std::vector<std::string> select_pairs(const std::vector<RankedRecord>& ranked,
                                      const SelectionPolicy& policy);

} // namespace horizon
