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
#include <string>
#include <vector>

#include "horizon/scene.hpp"

namespace horizon {

struct GtSubject {
    std::string category;
    BoundingBox box;
};

struct GroundTruthRecord {
    std::string scene_id;
    std::vector<GtSubject> subjects;
};

struct Detection {
    std::string category;
    BoundingBox box;
    double confidence = 1.0;
};

struct DetectionRecord {
    std::string scene_id;
    std::vector<Detection> detections;
};

// Intersection over union of two boxes; 0 when disjoint.
double iou(const BoundingBox& a, const BoundingBox& b);

// One-to-one matching between a scene's ground truth and detections.
// Candidate pairs require equal categories and are taken greedily by IoU
// descending (ties by detection confidence descending, then detection index,
// then subject index); each side is used at most once.
struct SceneMatch {
    std::string scene_id;

    struct GtResult {
        int det_index = -1; // -1 when unmatched
        double iou = 0.0;
    };
    std::vector<GtResult> gt;

    struct DetResult {
        int gt_index = -1; // -1 when unmatched (false positive at any threshold)
        double iou = 0.0;
        double confidence = 1.0;
    };
    std::vector<DetResult> det;
};

// Throws Error{SceneIdMismatch} when the records disagree on scene_id.
SceneMatch match_scene(const GroundTruthRecord& gt, const DetectionRecord& det);

// Mean matched IoU over every ground-truth subject across scenes; unmatched
// subjects count as 0. Throws Error{EmptyDataset} when there are no subjects.
double compute_miou(const std::vector<SceneMatch>& matches);

// All-point interpolated area under the pooled precision-recall curve at one
// IoU threshold. Detections are ranked by confidence descending (ties by
// scene_id, then index); a detection is a true positive iff it matched with
// IoU >= threshold; the recall denominator is the total subject count.
double average_precision(const std::vector<SceneMatch>& matches, double threshold);

struct ApResult {
    double ap = 0.0;   // mean over thresholds 0.50:0.05:0.95
    double ap50 = 0.0; // threshold 0.50
    double ap70 = 0.0; // threshold 0.70
};

ApResult compute_ap(const std::vector<SceneMatch>& matches);

struct GroupMetrics {
    std::size_t scenes = 0;
    std::size_t subjects = 0;
    double mean_iou = 0.0;
    ApResult ap;
};

struct BenchReport {
    double iou_mean = 0.0; // single-subject scenes
    double miou = 0.0;     // multi-subject scenes
    double ap = 0.0;       // all scenes pooled
    double ap50 = 0.0;
    double ap70 = 0.0;
    GroupMetrics single;
    GroupMetrics multi;
    std::vector<std::string> missing_scenes; // in gt but absent from detections
    std::vector<SceneMatch> per_scene;
};

// Full evaluation. Ground-truth scenes missing from the detections count as
// all-unmatched and are listed in missing_scenes; detection records whose
// scene_id is not in the ground truth raise Error{SceneIdMismatch}.
BenchReport evaluate_bench(const std::vector<GroundTruthRecord>& gt,
                           const std::vector<DetectionRecord>& det);

struct GeneratorConstraints {
    double area_min = 0.04;
    double area_max = 0.60;
    double aspect_min = 1.0 / 3.0;
    double aspect_max = 3.0;
    // Minimum fraction of multi-subject scenes that must contain a box pair
    // with IoU in (0, challenging_iou_max] or a separation gap below
    // adjacency_gap.
    double min_challenging_fraction = 0.30;
    double challenging_iou_max = 0.30;
    double adjacency_gap = 0.02;

    void validate() const;
};

// Seeded benchmark scene generator: count_single scenes with one subject and
// count_multi scenes with 2-3 subjects, every box satisfying the area and
// aspect constraints, with at least the required fraction of multi-subject
// scenes containing a challenging pair. Byte-identical for identical seeds.
std::vector<GroundTruthRecord> generate_bench(int count_single, int count_multi,
                                              std::uint64_t seed,
                                              const GeneratorConstraints& constraints = {});

// Checks a generated benchmark against the constraints; throws
// Error{BadConstraints} describing the first violation.
void validate_bench(const std::vector<GroundTruthRecord>& scenes, int expected_single,
                    int expected_multi, const GeneratorConstraints& constraints = {});

// Minimal separation between two boxes: 0 when they overlap or touch.
double box_gap(const BoundingBox& a, const BoundingBox& b);

} // namespace horizon
