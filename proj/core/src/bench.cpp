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

#include "horizon/bench.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <map>
#include <string>

#include "horizon/rng.hpp"

namespace horizon {

double iou(const BoundingBox& a, const BoundingBox& b) {
    const double iw = std::min(a.x_max, b.x_max) - std::max(a.x_min, b.x_min);
    const double ih = std::min(a.y_max, b.y_max) - std::max(a.y_min, b.y_min);
    if (iw <= 0.0 || ih <= 0.0) {
        return 0.0;
    }
    const double inter = iw * ih;
    return inter / (a.area() + b.area() - inter);
}

double box_gap(const BoundingBox& a, const BoundingBox& b) {
    const double dx = std::max({a.x_min - b.x_max, b.x_min - a.x_max, 0.0});
    const double dy = std::max({a.y_min - b.y_max, b.y_min - a.y_max, 0.0});
    return std::hypot(dx, dy);
}

SceneMatch match_scene(const GroundTruthRecord& gt, const DetectionRecord& det) {
    if (gt.scene_id != det.scene_id) {
        throw Error(ErrorKind::SceneIdMismatch,
                    "'" + gt.scene_id + "' vs '" + det.scene_id + "'");
    }

    struct Candidate {
        double iou;
        double confidence;
        std::size_t det_index;
        std::size_t gt_index;
    };
    std::vector<Candidate> candidates;
    for (std::size_t d = 0; d < det.detections.size(); ++d) {
        for (std::size_t g = 0; g < gt.subjects.size(); ++g) {
            if (det.detections[d].category == gt.subjects[g].category) {
                candidates.push_back({iou(gt.subjects[g].box, det.detections[d].box),
                                      det.detections[d].confidence, d, g});
            }
        }
    }
    std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
        if (a.iou != b.iou) return a.iou > b.iou;
        if (a.confidence != b.confidence) return a.confidence > b.confidence;
        if (a.det_index != b.det_index) return a.det_index < b.det_index;
        return a.gt_index < b.gt_index;
    });

    SceneMatch match;
    match.scene_id = gt.scene_id;
    match.gt.resize(gt.subjects.size());
    match.det.resize(det.detections.size());
    for (std::size_t d = 0; d < det.detections.size(); ++d) {
        match.det[d].confidence = det.detections[d].confidence;
    }

    std::vector<bool> gt_used(gt.subjects.size(), false);
    std::vector<bool> det_used(det.detections.size(), false);
    for (const Candidate& c : candidates) {
        if (gt_used[c.gt_index] || det_used[c.det_index]) {
            continue;
        }
        gt_used[c.gt_index] = true;
        det_used[c.det_index] = true;
        match.gt[c.gt_index] = {static_cast<int>(c.det_index), c.iou};
        match.det[c.det_index].gt_index = static_cast<int>(c.gt_index);
        match.det[c.det_index].iou = c.iou;
    }
    return match;
}

double compute_miou(const std::vector<SceneMatch>& matches) {
    std::size_t subjects = 0;
    double total = 0.0;
    for (const SceneMatch& m : matches) {
        for (const SceneMatch::GtResult& g : m.gt) {
            total += g.det_index >= 0 ? g.iou : 0.0;
            ++subjects;
        }
    }
    if (subjects == 0) {
        throw Error(ErrorKind::EmptyDataset, "no ground-truth subjects");
    }
    return total / static_cast<double>(subjects);
}

namespace {

struct RankedDetection {
    double confidence;
    const std::string* scene_id;
    std::size_t index;
    bool matched;
    double iou;
};

std::vector<RankedDetection> rank_detections(const std::vector<SceneMatch>& matches) {
    std::vector<RankedDetection> ranked;
    for (const SceneMatch& m : matches) {
        for (std::size_t d = 0; d < m.det.size(); ++d) {
            ranked.push_back({m.det[d].confidence, &m.scene_id, d, m.det[d].gt_index >= 0,
                              m.det[d].iou});
        }
    }
    std::sort(ranked.begin(), ranked.end(), [](const RankedDetection& a, const RankedDetection& b) {
        if (a.confidence != b.confidence) return a.confidence > b.confidence;
        if (*a.scene_id != *b.scene_id) return *a.scene_id < *b.scene_id;
        return a.index < b.index;
    });
    return ranked;
}

std::size_t count_subjects(const std::vector<SceneMatch>& matches) {
    std::size_t subjects = 0;
    for (const SceneMatch& m : matches) {
        subjects += m.gt.size();
    }
    return subjects;
}

} // namespace

double average_precision(const std::vector<SceneMatch>& matches, double threshold) {
    const std::size_t total_gt = count_subjects(matches);
    if (total_gt == 0) {
        throw Error(ErrorKind::EmptyDataset, "no ground-truth subjects");
    }
    const std::vector<RankedDetection> ranked = rank_detections(matches);
    if (ranked.empty()) {
        return 0.0;
    }

    std::vector<double> precision(ranked.size());
    std::vector<double> recall(ranked.size());
    std::size_t tp = 0;
    for (std::size_t i = 0; i < ranked.size(); ++i) {
        if (ranked[i].matched && ranked[i].iou >= threshold) {
            ++tp;
        }
        precision[i] = static_cast<double>(tp) / static_cast<double>(i + 1);
        recall[i] = static_cast<double>(tp) / static_cast<double>(total_gt);
    }

    // All-point interpolation: precision envelope from the right.
    for (std::size_t i = ranked.size() - 1; i-- > 0;) {
        precision[i] = std::max(precision[i], precision[i + 1]);
    }

    double ap = 0.0;
    double prev_recall = 0.0;
    for (std::size_t i = 0; i < ranked.size(); ++i) {
        if (recall[i] > prev_recall) {
            ap += (recall[i] - prev_recall) * precision[i];
            prev_recall = recall[i];
        }
    }
    return ap;
}

ApResult compute_ap(const std::vector<SceneMatch>& matches) {
    ApResult result;
    int count = 0;
    for (int i = 0; i <= 9; ++i) {
        const double t = 0.50 + 0.05 * static_cast<double>(i);
        const double ap_t = average_precision(matches, t);
        result.ap += ap_t;
        ++count;
        if (i == 0) result.ap50 = ap_t;
        if (i == 4) result.ap70 = ap_t;
    }
    result.ap /= static_cast<double>(count);
    return result;
}

namespace {

GroupMetrics group_metrics(const std::vector<SceneMatch>& matches) {
    GroupMetrics g;
    g.scenes = matches.size();
    g.subjects = count_subjects(matches);
    if (g.subjects > 0) {
        g.mean_iou = compute_miou(matches);
        g.ap = compute_ap(matches);
    }
    return g;
}

} // namespace

BenchReport evaluate_bench(const std::vector<GroundTruthRecord>& gt,
                           const std::vector<DetectionRecord>& det) {
    if (gt.empty()) {
        throw Error(ErrorKind::EmptyDataset, "no ground-truth scenes");
    }
    std::map<std::string, const GroundTruthRecord*> gt_by_id;
    for (const GroundTruthRecord& g : gt) {
        if (!gt_by_id.emplace(g.scene_id, &g).second) {
            throw Error(ErrorKind::InvalidSpec, "duplicate ground-truth scene " + g.scene_id);
        }
    }
    std::map<std::string, const DetectionRecord*> det_by_id;
    for (const DetectionRecord& d : det) {
        if (gt_by_id.find(d.scene_id) == gt_by_id.end()) {
            throw Error(ErrorKind::SceneIdMismatch,
                        "detection scene '" + d.scene_id + "' is not in the ground truth");
        }
        if (!det_by_id.emplace(d.scene_id, &d).second) {
            throw Error(ErrorKind::InvalidSpec, "duplicate detection scene " + d.scene_id);
        }
    }

    BenchReport report;
    std::vector<SceneMatch> single_matches;
    std::vector<SceneMatch> multi_matches;
    for (const GroundTruthRecord& g : gt) {
        const auto it = det_by_id.find(g.scene_id);
        DetectionRecord empty{g.scene_id, {}};
        if (it == det_by_id.end()) {
            report.missing_scenes.push_back(g.scene_id);
        }
        SceneMatch m = match_scene(g, it == det_by_id.end() ? empty : *it->second);
        (g.subjects.size() <= 1 ? single_matches : multi_matches).push_back(m);
        report.per_scene.push_back(std::move(m));
    }

    report.single = group_metrics(single_matches);
    report.multi = group_metrics(multi_matches);
    report.iou_mean = report.single.mean_iou;
    report.miou = report.multi.mean_iou;
    const ApResult pooled = compute_ap(report.per_scene);
    report.ap = pooled.ap;
    report.ap50 = pooled.ap50;
    report.ap70 = pooled.ap70;
    return report;
}

void GeneratorConstraints::validate() const {
    if (!(area_min > 0.0) || !(area_max <= 1.0) || area_min > area_max) {
        throw Error(ErrorKind::BadConstraints, "box area range must satisfy 0 < min <= max <= 1");
    }
    if (!(aspect_min > 0.0) || aspect_min > aspect_max) {
        throw Error(ErrorKind::BadConstraints, "aspect range must satisfy 0 < min <= max");
    }
    if (min_challenging_fraction < 0.0 || min_challenging_fraction > 1.0) {
        throw Error(ErrorKind::BadConstraints, "challenging fraction must lie in [0, 1]");
    }
    if (challenging_iou_max <= 0.0 || challenging_iou_max > 1.0 || adjacency_gap <= 0.0) {
        throw Error(ErrorKind::BadConstraints, "challenging thresholds must be positive");
    }
}

namespace {

constexpr std::array<const char*, 16> kCategories = {
    "dog",  "cat",   "car",      "chair", "vase",  "robot", "lamp",   "backpack",
    "teapot", "sneaker", "clock", "plant", "boat",  "camera", "guitar", "mug",
};

bool box_fits_constraints(const BoundingBox& b, const GeneratorConstraints& c) {
    if (!b.valid()) return false;
    const double w = b.x_max - b.x_min;
    const double h = b.y_max - b.y_min;
    const double area = w * h;
    const double aspect = w / h;
    return area >= c.area_min && area <= c.area_max && aspect >= c.aspect_min &&
           aspect <= c.aspect_max;
}

// Samples a box with area and aspect drawn inside the constraint ranges
// (slightly shrunk so float noise cannot push a box out of range).
BoundingBox sample_box(SplitMix64& rng, const GeneratorConstraints& c) {
    for (;;) {
        const double area = rng.uniform(c.area_min * 1.01, std::min(c.area_max * 0.99, 0.9));
        const double aspect =
            std::exp(rng.uniform(std::log(c.aspect_min * 1.05), std::log(c.aspect_max * 0.95)));
        const double w = std::sqrt(area * aspect);
        const double h = std::sqrt(area / aspect);
        if (w >= 1.0 || h >= 1.0) {
            continue;
        }
        BoundingBox b;
        b.x_min = rng.uniform(0.0, 1.0 - w);
        b.y_min = rng.uniform(0.0, 1.0 - h);
        b.x_max = b.x_min + w;
        b.y_max = b.y_min + h;
        if (box_fits_constraints(b, c)) {
            return b;
        }
    }
}

bool pair_is_challenging(const BoundingBox& a, const BoundingBox& b,
                         const GeneratorConstraints& c) {
    const double overlap = iou(a, b);
    if (overlap > 0.0 && overlap <= c.challenging_iou_max) return true;
    return overlap == 0.0 && box_gap(a, b) < c.adjacency_gap;
}

struct BoxPair {
    BoundingBox first;
    BoundingBox second;
};

// Samples a pair that makes a scene challenging: either a small positive
// overlap (shifted same-size copy, IoU = (1-s)/(1+s) inside (0, 0.3]) or a
// near-touching neighbor. Retries with a fresh base until both boxes fit the
// canvas.
BoxPair sample_challenging_pair(SplitMix64& rng, const GeneratorConstraints& c) {
    for (;;) {
        const BoundingBox base = sample_box(rng, c);
        const double w = base.x_max - base.x_min;
        const double h = base.y_max - base.y_min;
        BoundingBox b = base;
        if (rng.coin()) {
            const double shift = rng.uniform(0.60, 0.95);
            if (rng.coin()) {
                b.x_min = base.x_min + shift * w;
                b.x_max = base.x_max + shift * w;
            } else {
                b.y_min = base.y_min + shift * h;
                b.y_max = base.y_max + shift * h;
            }
        } else {
            const double gap = rng.uniform(0.2 * c.adjacency_gap, 0.8 * c.adjacency_gap);
            if (rng.coin()) {
                b.x_min = base.x_max + gap;
                b.x_max = b.x_min + w;
            } else {
                b.y_min = base.y_max + gap;
                b.y_max = b.y_min + h;
            }
        }
        if (b.x_max <= 1.0 && b.y_max <= 1.0 && box_fits_constraints(b, c) &&
            pair_is_challenging(base, b, c)) {
            return {base, b};
        }
    }
}

bool scene_has_challenging_pair(const GroundTruthRecord& scene, const GeneratorConstraints& c) {
    for (std::size_t i = 0; i < scene.subjects.size(); ++i) {
        for (std::size_t j = i + 1; j < scene.subjects.size(); ++j) {
            if (pair_is_challenging(scene.subjects[i].box, scene.subjects[j].box, c)) {
                return true;
            }
        }
    }
    return false;
}

std::string scene_name(const char* prefix, int index) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%s-%04d", prefix, index);
    return buf;
}

} // namespace

std::vector<GroundTruthRecord> generate_bench(int count_single, int count_multi,
                                              std::uint64_t seed,
                                              const GeneratorConstraints& constraints) {
    if (count_single < 0 || count_multi < 0) {
        throw Error(ErrorKind::BadConstraints, "scene counts must be non-negative");
    }
    constraints.validate();

    SplitMix64 rng(seed);
    auto category = [&rng]() { return std::string(kCategories[rng.next() % kCategories.size()]); };

    std::vector<GroundTruthRecord> scenes;
    scenes.reserve(static_cast<std::size_t>(count_single + count_multi));

    for (int i = 0; i < count_single; ++i) {
        GroundTruthRecord scene;
        scene.scene_id = scene_name("single", i);
        scene.subjects.push_back({category(), sample_box(rng, constraints)});
        scenes.push_back(std::move(scene));
    }

    for (int i = 0; i < count_multi; ++i) {
        GroundTruthRecord scene;
        scene.scene_id = scene_name("multi", i);
        const int subjects = 2 + static_cast<int>(rng.next() % 2); // 2 or 3
        const bool challenging = (i % 5) < 2; // 40%, above the 30% requirement

        if (challenging) {
            const BoxPair pair = sample_challenging_pair(rng, constraints);
            scene.subjects.push_back({category(), pair.first});
            scene.subjects.push_back({category(), pair.second});
        } else {
            scene.subjects.push_back({category(), sample_box(rng, constraints)});
            scene.subjects.push_back({category(), sample_box(rng, constraints)});
        }
        for (int s = 2; s < subjects; ++s) {
            scene.subjects.push_back({category(), sample_box(rng, constraints)});
        }
        scenes.push_back(std::move(scene));
    }
    return scenes;
}

void validate_bench(const std::vector<GroundTruthRecord>& scenes, int expected_single,
                    int expected_multi, const GeneratorConstraints& constraints) {
    constraints.validate();
    std::size_t single = 0;
    std::size_t multi = 0;
    std::size_t challenging = 0;
    for (const GroundTruthRecord& scene : scenes) {
        if (scene.subjects.empty()) {
            throw Error(ErrorKind::BadConstraints, scene.scene_id + ": scene has no subjects");
        }
        for (const GtSubject& s : scene.subjects) {
            if (!box_fits_constraints(s.box, constraints)) {
                throw Error(ErrorKind::BadConstraints,
                            scene.scene_id + ": box violates area/aspect constraints");
            }
            if (s.category.empty()) {
                throw Error(ErrorKind::BadConstraints, scene.scene_id + ": empty category");
            }
        }
        if (scene.subjects.size() == 1) {
            ++single;
        } else {
            ++multi;
            if (scene_has_challenging_pair(scene, constraints)) {
                ++challenging;
            }
        }
    }
    if (single != static_cast<std::size_t>(expected_single) ||
        multi != static_cast<std::size_t>(expected_multi)) {
        throw Error(ErrorKind::BadConstraints,
                    "scene counts " + std::to_string(single) + "/" + std::to_string(multi) +
                        " do not match expected " + std::to_string(expected_single) + "/" +
                        std::to_string(expected_multi));
    }
    if (multi > 0) {
        const double fraction = static_cast<double>(challenging) / static_cast<double>(multi);
        if (fraction < constraints.min_challenging_fraction) {
            throw Error(ErrorKind::BadConstraints,
                        "challenging fraction " + std::to_string(fraction) + " below minimum");
        }
    }
}

} // namespace horizon
