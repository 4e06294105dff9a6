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

#include "horizon/json_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace horizon {

using ordered_json = nlohmann::ordered_json;

namespace {

constexpr char kBase64Alphabet[] =
    "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

int base64_value(char c) {
    if (c >= 'A' && c <= 'Z') return c - 'A';
    if (c >= 'a' && c <= 'z') return c - 'a' + 26;
    if (c >= '0' && c <= '9') return c - '0' + 52;
    if (c == '+') return 62;
    if (c == '/') return 63;
    return -1;
}

[[noreturn]] void parse_fail(const std::string& what) {
    throw Error(ErrorKind::ParseError, what);
}

double require_finite_number(const ordered_json& j, const char* field) {
    if (!j.contains(field) || !j[field].is_number()) {
        parse_fail(std::string("missing or non-numeric field '") + field + "'");
    }
    const double v = j[field].get<double>();
    if (!std::isfinite(v)) {
        parse_fail(std::string("field '") + field + "' must be finite");
    }
    return v;
}

int require_int(const ordered_json& j, const char* field) {
    if (!j.contains(field) || !j[field].is_number_integer()) {
        parse_fail(std::string("missing or non-integer field '") + field + "'");
    }
    return j[field].get<int>();
}

std::string require_string(const ordered_json& j, const char* field) {
    if (!j.contains(field) || !j[field].is_string()) {
        parse_fail(std::string("missing or non-string field '") + field + "'");
    }
    return j[field].get<std::string>();
}

BoundingBox box_from_json(const ordered_json& j) {
    if (!j.is_array() || j.size() != 4) {
        parse_fail("box must be an array [x_min,y_min,x_max,y_max]");
    }
    BoundingBox b;
    double vals[4];
    for (std::size_t i = 0; i < 4; ++i) {
        if (!j[i].is_number()) parse_fail("box coordinates must be numbers");
        vals[i] = j[i].get<double>();
        if (!std::isfinite(vals[i])) parse_fail("box coordinates must be finite");
    }
    b.x_min = vals[0];
    b.y_min = vals[1];
    b.x_max = vals[2];
    b.y_max = vals[3];
    if (!b.valid()) parse_fail("box is not a valid normalized box");
    return b;
}

ordered_json box_to_json(const BoundingBox& b) {
    return ordered_json::array({b.x_min, b.y_min, b.x_max, b.y_max});
}

ordered_json parse_json(const std::string& text) {
    ordered_json j = ordered_json::parse(text, nullptr, false);
    if (j.is_discarded()) {
        parse_fail("malformed JSON");
    }
    return j;
}

// Applies fn to every non-empty line, rethrowing errors with the line number.
template <typename Fn>
void for_each_jsonl_line(std::istream& in, Fn&& fn) {
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) {
            continue;
        }
        try {
            fn(parse_json(line));
        } catch (const Error& e) {
            throw Error(e.kind(), "line " + std::to_string(line_no) + ": " + e.what());
        }
    }
}

} // namespace

std::string base64_encode(const std::vector<std::uint8_t>& bytes) {
    std::string out;
    out.reserve((bytes.size() + 2) / 3 * 4);
    std::size_t i = 0;
    for (; i + 3 <= bytes.size(); i += 3) {
        const std::uint32_t v = (bytes[i] << 16) | (bytes[i + 1] << 8) | bytes[i + 2];
        out.push_back(kBase64Alphabet[(v >> 18) & 63]);
        out.push_back(kBase64Alphabet[(v >> 12) & 63]);
        out.push_back(kBase64Alphabet[(v >> 6) & 63]);
        out.push_back(kBase64Alphabet[v & 63]);
    }
    const std::size_t rest = bytes.size() - i;
    if (rest == 1) {
        const std::uint32_t v = bytes[i] << 16;
        out.push_back(kBase64Alphabet[(v >> 18) & 63]);
        out.push_back(kBase64Alphabet[(v >> 12) & 63]);
        out.append("==");
    } else if (rest == 2) {
        const std::uint32_t v = (bytes[i] << 16) | (bytes[i + 1] << 8);
        out.push_back(kBase64Alphabet[(v >> 18) & 63]);
        out.push_back(kBase64Alphabet[(v >> 12) & 63]);
        out.push_back(kBase64Alphabet[(v >> 6) & 63]);
        out.push_back('=');
    }
    return out;
}

std::vector<std::uint8_t> base64_decode(const std::string& text) {
    if (text.size() % 4 != 0) {
        parse_fail("base64 length must be a multiple of 4");
    }
    std::vector<std::uint8_t> out;
    out.reserve(text.size() / 4 * 3);
    for (std::size_t i = 0; i < text.size(); i += 4) {
        int vals[4];
        int pad = 0;
        for (std::size_t k = 0; k < 4; ++k) {
            const char c = text[i + k];
            if (c == '=' && i + 4 == text.size() && k >= 2) {
                vals[k] = 0;
                ++pad;
            } else {
                vals[k] = base64_value(c);
                if (vals[k] < 0 || pad > 0) parse_fail("invalid base64 character");
            }
        }
        const std::uint32_t v = (vals[0] << 18) | (vals[1] << 12) | (vals[2] << 6) | vals[3];
        out.push_back(static_cast<std::uint8_t>((v >> 16) & 0xFF));
        if (pad < 2) out.push_back(static_cast<std::uint8_t>((v >> 8) & 0xFF));
        if (pad < 1) out.push_back(static_cast<std::uint8_t>(v & 0xFF));
    }
    return out;
}

SceneSpec scene_from_json_text(const std::string& text) {
    const ordered_json j = parse_json(text);
    if (!j.is_object()) parse_fail("scene spec must be a JSON object");
    SceneSpec spec;
    spec.text_len = require_int(j, "text_len");
    spec.noise_h = require_int(j, "noise_h");
    spec.noise_w = require_int(j, "noise_w");
    if (!j.contains("seed") || !j["seed"].is_number_unsigned()) {
        parse_fail("missing or negative field 'seed'");
    }
    spec.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("refs")) {
        if (!j["refs"].is_array()) parse_fail("'refs' must be an array");
        for (const auto& rj : j["refs"]) {
            ReferenceSpec ref;
            ref.grid_h = require_int(rj, "grid_h");
            ref.grid_w = require_int(rj, "grid_w");
            ref.category = rj.contains("category") ? require_string(rj, "category") : "";
            if (!rj.contains("box")) parse_fail("reference missing 'box'");
            ref.box = box_from_json(rj["box"]);
            spec.refs.push_back(std::move(ref));
        }
    }
    try {
        spec.validate();
    } catch (const Error& e) {
        parse_fail(e.what());
    }
    return spec;
}

std::string scene_to_json_text(const SceneSpec& spec) {
    ordered_json j;
    j["text_len"] = spec.text_len;
    j["noise_h"] = spec.noise_h;
    j["noise_w"] = spec.noise_w;
    j["seed"] = spec.seed;
    j["refs"] = ordered_json::array();
    for (const ReferenceSpec& ref : spec.refs) {
        ordered_json rj;
        rj["grid_h"] = ref.grid_h;
        rj["grid_w"] = ref.grid_w;
        rj["category"] = ref.category;
        rj["box"] = box_to_json(ref.box);
        j["refs"].push_back(std::move(rj));
    }
    return j.dump();
}

namespace {

const char* segment_kind_name(SegmentKind kind) {
    switch (kind) {
    case SegmentKind::Text: return "text";
    case SegmentKind::Noise: return "noise";
    case SegmentKind::Ref: return "ref";
    }
    return "?";
}

} // namespace

std::string mask_to_json_text(const HorizonMask& mask) {
    const TokenLayout& layout = mask.layout();
    ordered_json j;
    j["layout"]["total_len"] = layout.total_len();
    j["layout"]["noise_h"] = layout.noise_h();
    j["layout"]["noise_w"] = layout.noise_w();
    j["layout"]["segments"] = ordered_json::array();
    for (const Segment& s : layout.segments()) {
        ordered_json sj;
        sj["kind"] = segment_kind_name(s.kind);
        if (s.kind == SegmentKind::Ref) sj["ref_index"] = s.ref_index;
        sj["start"] = s.start;
        sj["len"] = s.len;
        j["layout"]["segments"].push_back(std::move(sj));
    }
    // Segment-pair rules; bitmap rules defer to ref_visibility.
    j["blocks"] = ordered_json::array({
        ordered_json{{"q", "text"}, {"k", "*"}, {"rule", "ones"}},
        ordered_json{{"q", "*"}, {"k", "text"}, {"rule", "ones"}},
        ordered_json{{"q", "noise"}, {"k", "noise"}, {"rule", "ones"}},
        ordered_json{{"q", "ref_i"}, {"k", "ref_i"}, {"rule", "ones"}},
        ordered_json{{"q", "ref_i"}, {"k", "ref_j"}, {"rule", "zeros"}},
        ordered_json{{"q", "ref_i"}, {"k", "noise"}, {"rule", "bitmap"}},
        ordered_json{{"q", "noise"}, {"k", "ref_i"}, {"rule", "bitmap"}},
    });
    j["ref_visibility"] = ordered_json::array();
    for (std::size_t i = 0; i < mask.num_refs(); ++i) {
        j["ref_visibility"].push_back(base64_encode(mask.ref_visibility(i).bytes()));
    }
    return j.dump();
}

HorizonMask mask_from_json_text(const std::string& text) {
    const ordered_json j = parse_json(text);
    if (!j.is_object() || !j.contains("layout") || !j.contains("ref_visibility")) {
        parse_fail("mask dump must carry 'layout' and 'ref_visibility'");
    }
    const ordered_json& lj = j["layout"];
    const int noise_h = require_int(lj, "noise_h");
    const int noise_w = require_int(lj, "noise_w");
    if (!lj.contains("segments") || !lj["segments"].is_array()) {
        parse_fail("layout missing 'segments'");
    }
    std::vector<Segment> segments;
    for (const auto& sj : lj["segments"]) {
        Segment s;
        const std::string kind = require_string(sj, "kind");
        if (kind == "text") {
            s.kind = SegmentKind::Text;
        } else if (kind == "noise") {
            s.kind = SegmentKind::Noise;
        } else if (kind == "ref") {
            s.kind = SegmentKind::Ref;
            s.ref_index = require_int(sj, "ref_index");
        } else {
            parse_fail("unknown segment kind '" + kind + "'");
        }
        s.start = static_cast<std::size_t>(require_int(sj, "start"));
        s.len = static_cast<std::size_t>(require_int(sj, "len"));
        segments.push_back(s);
    }
    TokenLayout layout;
    try {
        layout = TokenLayout(std::move(segments), noise_h, noise_w);
    } catch (const Error& e) {
        parse_fail(e.what());
    }
    if (lj.contains("total_len") &&
        lj["total_len"].get<std::size_t>() != layout.total_len()) {
        parse_fail("total_len does not match the segments");
    }

    std::vector<Bitmap> bitmaps;
    for (const auto& bj : j["ref_visibility"]) {
        if (!bj.is_string()) parse_fail("ref_visibility entries must be base64 strings");
        bitmaps.push_back(
            Bitmap::from_bytes(layout.noise_len(), base64_decode(bj.get<std::string>())));
    }
    try {
        return HorizonMask(std::move(layout), std::move(bitmaps));
    } catch (const Error& e) {
        parse_fail(e.what());
    }
}

void write_pgm(std::ostream& out, const std::vector<std::uint8_t>& dense, std::size_t len) {
    if (dense.size() != len * len) {
        throw Error(ErrorKind::ShapeMismatch, "dense mask size must be len*len");
    }
    out << "P5\n" << len << " " << len << "\n255\n";
    for (std::uint8_t v : dense) {
        out.put(v ? static_cast<char>(255) : 0);
    }
}

std::vector<ScoreRecord> read_score_jsonl(std::istream& in) {
    std::vector<ScoreRecord> records;
    for_each_jsonl_line(in, [&records](const ordered_json& j) {
        ScoreRecord r;
        r.pair_id = require_string(j, "pair_id");
        r.clip_i = require_finite_number(j, "clip_i");
        r.dino = require_finite_number(j, "dino");
        r.s_vlm = require_finite_number(j, "s_vlm");
        r.s_ds = require_finite_number(j, "s_ds");
        if (r.clip_i < -1.0 || r.clip_i > 1.0 || r.dino < -1.0 || r.dino > 1.0) {
            parse_fail("clip_i and dino must lie in [-1, 1]");
        }
        records.push_back(std::move(r));
    });
    return records;
}

std::string ranked_to_jsonl(const std::vector<RankedRecord>& ranked,
                            const std::vector<std::string>& kept) {
    const std::set<std::string> kept_set(kept.begin(), kept.end());
    std::string out;
    for (const RankedRecord& r : ranked) {
        ordered_json j;
        j["pair_id"] = r.pair_id;
        j["r_v"] = r.r_v;
        j["r_vlm"] = r.r_vlm;
        j["r_ds"] = r.r_ds;
        j["rank"] = r.rank;
        j["kept"] = kept_set.count(r.pair_id) > 0;
        out += j.dump();
        out += '\n';
    }
    return out;
}

std::vector<GroundTruthRecord> read_gt_jsonl(std::istream& in) {
    std::vector<GroundTruthRecord> records;
    for_each_jsonl_line(in, [&records](const ordered_json& j) {
        GroundTruthRecord r;
        r.scene_id = require_string(j, "scene_id");
        if (!j.contains("subjects") || !j["subjects"].is_array() || j["subjects"].empty()) {
            parse_fail("scene must carry a non-empty 'subjects' array");
        }
        for (const auto& sj : j["subjects"]) {
            GtSubject s;
            s.category = require_string(sj, "category");
            if (!sj.contains("box")) parse_fail("subject missing 'box'");
            s.box = box_from_json(sj["box"]);
            r.subjects.push_back(std::move(s));
        }
        records.push_back(std::move(r));
    });
    return records;
}

std::string gt_to_jsonl(const std::vector<GroundTruthRecord>& scenes) {
    std::string out;
    for (const GroundTruthRecord& scene : scenes) {
        ordered_json j;
        j["scene_id"] = scene.scene_id;
        j["subjects"] = ordered_json::array();
        for (const GtSubject& s : scene.subjects) {
            ordered_json sj;
            sj["category"] = s.category;
            sj["box"] = box_to_json(s.box);
            j["subjects"].push_back(std::move(sj));
        }
        out += j.dump();
        out += '\n';
    }
    return out;
}

std::vector<DetectionRecord> read_det_jsonl(std::istream& in) {
    std::vector<DetectionRecord> records;
    for_each_jsonl_line(in, [&records](const ordered_json& j) {
        DetectionRecord r;
        r.scene_id = require_string(j, "scene_id");
        if (!j.contains("detections") || !j["detections"].is_array()) {
            parse_fail("scene must carry a 'detections' array");
        }
        for (const auto& dj : j["detections"]) {
            Detection d;
            d.category = require_string(dj, "category");
            if (!dj.contains("box")) parse_fail("detection missing 'box'");
            d.box = box_from_json(dj["box"]);
            if (dj.contains("confidence")) {
                d.confidence = require_finite_number(dj, "confidence");
                if (d.confidence < 0.0 || d.confidence > 1.0) {
                    parse_fail("confidence must lie in [0, 1]");
                }
            }
            r.detections.push_back(std::move(d));
        }
        records.push_back(std::move(r));
    });
    return records;
}

namespace {

ordered_json group_to_json(const GroupMetrics& g) {
    ordered_json j;
    j["scenes"] = g.scenes;
    j["subjects"] = g.subjects;
    j["mean_iou"] = g.mean_iou;
    j["ap"] = g.ap.ap;
    j["ap50"] = g.ap.ap50;
    j["ap70"] = g.ap.ap70;
    return j;
}

} // namespace

std::string bench_report_to_json_text(const BenchReport& report) {
    ordered_json j;
    j["iou_mean"] = report.iou_mean;
    j["miou"] = report.miou;
    j["ap"] = report.ap;
    j["ap50"] = report.ap50;
    j["ap70"] = report.ap70;
    j["single"] = group_to_json(report.single);
    j["multi"] = group_to_json(report.multi);
    j["missing_scenes"] = report.missing_scenes;
    j["per_scene"] = ordered_json::array();
    for (const SceneMatch& m : report.per_scene) {
        ordered_json mj;
        mj["scene_id"] = m.scene_id;
        mj["subjects"] = ordered_json::array();
        for (const SceneMatch::GtResult& g : m.gt) {
            ordered_json gj;
            gj["matched"] = g.det_index >= 0;
            gj["det_index"] = g.det_index;
            gj["iou"] = g.iou;
            mj["subjects"].push_back(std::move(gj));
        }
        j["per_scene"].push_back(std::move(mj));
    }
    return j.dump(2) + "\n";
}

std::string bench_report_to_table(const BenchReport& report) {
    char buf[256];
    std::string out;
    out += "            |  Single-Subject                |  Multi-Subject\n";
    out += "            |  IoU     AP  / AP50 / AP70     |  mIoU    AP  / AP50 / AP70\n";
    out += "------------+--------------------------------+-------------------------------\n";
    std::snprintf(buf, sizeof(buf),
                  "  this run  |  %.3f  %.3f / %.3f / %.3f  |  %.3f  %.3f / %.3f / %.3f\n",
                  report.single.mean_iou, report.single.ap.ap, report.single.ap.ap50,
                  report.single.ap.ap70, report.multi.mean_iou, report.multi.ap.ap,
                  report.multi.ap.ap50, report.multi.ap.ap70);
    out += buf;
    return out;
}

std::string ids_to_csv(const PositionIds& ids) {
    std::string out = "token_index,row_id,col_id\n";
    for (std::size_t i = 0; i < ids.size(); ++i) {
        out += std::to_string(i);
        out += ',';
        out += std::to_string(ids.row_ids[i]);
        out += ',';
        out += std::to_string(ids.col_ids[i]);
        out += '\n';
    }
    return out;
}

std::string visibility_stats_to_json_text(const VisibilityStats& stats) {
    ordered_json j;
    j["ones_fraction"] = stats.ones_fraction;
    j["per_ref_patch_counts"] = stats.per_ref_patch_counts;
    return j.dump();
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(ErrorKind::IoError, "cannot read " + path);
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& contents) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw Error(ErrorKind::IoError, "cannot write " + path);
    }
    out << contents;
    if (!out) {
        throw Error(ErrorKind::IoError, "failed writing " + path);
    }
}

} // namespace horizon
