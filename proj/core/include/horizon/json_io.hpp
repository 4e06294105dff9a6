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
#include <iosfwd>
#include <string>
#include <vector>

#include "horizon/bench.hpp"
#include "horizon/filter.hpp"
#include "horizon/mask.hpp"
#include "horizon/rope.hpp"
#include "horizon/scene.hpp"

// File formats. All JSON floats round-trip exactly (shortest representation
// that parses back to the same double); every writer is deterministic.

namespace horizon {

std::string base64_encode(const std::vector<std::uint8_t>& bytes);
std::vector<std::uint8_t> base64_decode(const std::string& text);

// Scene spec object:
// {"text_len":int,"noise_h":int,"noise_w":int,"seed":int,
//  "refs":[{"grid_h":int,"grid_w":int,"category":str,
//           "box":[x_min,y_min,x_max,y_max]}]}
SceneSpec scene_from_json_text(const std::string& text);
std::string scene_to_json_text(const SceneSpec& spec);

// Block-structure mask dump: layout, the segment-pair rule table, and one
// base64 bitmap per reference (bit n of bitmap i = patch n visible to ref i).
std::string mask_to_json_text(const HorizonMask& mask);
HorizonMask mask_from_json_text(const std::string& text);

// Binary PGM (P5, maxval 255) of the dense mask; 255 visible, 0 blocked.
void write_pgm(std::ostream& out, const std::vector<std::uint8_t>& dense, std::size_t len);

// Score records, one JSON object per line:
// {"pair_id":str,"clip_i":f,"dino":f,"s_vlm":f,"s_ds":f}
// Parse failures carry 1-based line numbers.
std::vector<ScoreRecord> read_score_jsonl(std::istream& in);
// {"pair_id":...,"r_v":...,"r_vlm":...,"r_ds":...,"rank":...,"kept":bool}
std::string ranked_to_jsonl(const std::vector<RankedRecord>& ranked,
                            const std::vector<std::string>& kept);

// Ground truth: {"scene_id":str,"subjects":[{"category":str,"box":[...]}]}
std::vector<GroundTruthRecord> read_gt_jsonl(std::istream& in);
std::string gt_to_jsonl(const std::vector<GroundTruthRecord>& scenes);

// Detections:
// {"scene_id":str,"detections":[{"category":str,"box":[...],"confidence":f}]}
// confidence is optional and defaults to 1.
std::vector<DetectionRecord> read_det_jsonl(std::istream& in);

std::string bench_report_to_json_text(const BenchReport& report);

// Plain-text metrics table: single-subject IoU and AP columns, multi-subject
// mIoU and AP columns.
std::string bench_report_to_table(const BenchReport& report);

// token_index,row_id,col_id per line, with a header row.
std::string ids_to_csv(const PositionIds& ids);

std::string visibility_stats_to_json_text(const VisibilityStats& stats);

// Whole-file helpers; throw Error{IoError} on unreadable/unwritable paths.
std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& contents);

} // namespace horizon
