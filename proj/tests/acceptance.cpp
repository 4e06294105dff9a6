// Acceptance suite: one self-contained check per release criterion, each
// printing a PASS/FAIL line. Exits nonzero if any criterion fails.
//
// Usage: horizon_acceptance <path-to-cli-binary>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <unordered_set>
#include <vector>

#include <sys/wait.h>
#include <unistd.h>

#include "horizon/attn.hpp"
#include "horizon/bench.hpp"
#include "horizon/filter.hpp"
#include "horizon/json_io.hpp"
#include "horizon/mask.hpp"
#include "horizon/rng.hpp"
#include "horizon/rope.hpp"
#include "horizon/scene.hpp"
#include "oracles.hpp"

namespace {

namespace fs = std::filesystem;
using namespace horizon;

std::string g_cli_path;

struct Criterion {
    int number;
    const char* name;
    std::function<bool(std::string&)> check; // detail message out-param
};

Matrix random_rows(SplitMix64& rng, std::size_t rows, std::size_t cols) {
    Matrix m(rows, cols);
    for (double& x : m.data) {
        x = rng.normal();
    }
    return m;
}

// ---------------------------------------------------------------------------
// 1. Dense mask equals the naive per-pair evaluator bit for bit.

bool mask_oracle_equivalence(std::string& detail) {
    const auto start = std::chrono::steady_clock::now();
    SplitMix64 rng(101);
    oracles::SceneLimits lim;
    lim.max_text = 16;
    lim.max_noise_side = 8;
    lim.max_refs = 3;
    lim.max_ref_side = 8;
    for (int trial = 0; trial < 1000; ++trial) {
        const SceneSpec spec = oracles::random_scene(rng, lim);
        const HorizonMask mask = build_horizon_mask(build_layout(spec), spec);
        if (materialize_dense(mask) != oracles::naive_dense_mask(spec)) {
            detail = "mismatch at trial " + std::to_string(trial);
            return false;
        }
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    detail = "1000 scenes bit-identical, " + std::to_string(secs) + " s";
    return secs < 10.0;
}

// ---------------------------------------------------------------------------
// 2. Zero leakage through the toy double-stream block.

bool zero_leakage(std::string& detail) {
    const auto start = std::chrono::steady_clock::now();
    SplitMix64 rng(202);
    oracles::SceneLimits lim;
    lim.max_text = 12;
    lim.max_noise_side = 6;
    lim.max_refs = 3;
    lim.max_ref_side = 5;
    lim.max_total = 160;
    double worst = 0.0;
    int scenes_with_refs = 0;
    int scenes = 0;
    while (scenes < 200) {
        const SceneSpec spec = oracles::random_scene(rng, lim);
        ++scenes;
        if (spec.refs.empty()) continue;
        ++scenes_with_refs;
        const TokenLayout layout = build_layout(spec);
        const HorizonMask mask = build_horizon_mask(layout, spec);
        const PositionIds ids = assign_position_ids(layout, spec);
        const TokenTensor tokens = synth_tokens(spec);
        const auto params = DoubleStreamParams::seeded(rng.next());
        const TokenTensor base = double_stream_forward(tokens, mask, ids, params);

        for (std::size_t i = 0; i < layout.num_refs(); ++i) {
            TokenTensor mutated = tokens;
            const Segment& seg = layout.ref_segment(i);
            for (std::size_t r = seg.start; r < seg.start + seg.len; ++r) {
                for (std::size_t c = 0; c < mutated.values.cols; ++c) {
                    mutated.values(r, c) = rng.normal();
                }
            }
            const TokenTensor out = double_stream_forward(mutated, mask, ids, params);
            for (std::size_t row = 0; row < layout.total_len(); ++row) {
                if (mask.visible(row, seg.start)) continue; // row not blocked for ref i
                for (std::size_t c = 0; c < base.values.cols; ++c) {
                    worst = std::max(worst,
                                     std::abs(base.values(row, c) - out.values(row, c)));
                }
            }
        }
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    char buf[160];
    std::snprintf(buf, sizeof(buf), "max deviation %.3e over %d scenes (%d with refs), %.1f s",
                  worst, scenes, scenes_with_refs, secs);
    detail = buf;
    return worst <= 1e-12 && secs < 60.0;
}

// ---------------------------------------------------------------------------
// 3. Dense and block-sparse kernels agree per element.

bool dense_sparse_equivalence(std::string& detail) {
    const auto start = std::chrono::steady_clock::now();
    SplitMix64 rng(303);
    oracles::SceneLimits lim;
    lim.max_text = 64;
    lim.max_noise_side = 24;
    lim.max_refs = 3;
    lim.max_ref_side = 12;
    lim.max_total = 1024;
    const AttentionConfig cfg{16, 1};
    double worst = 0.0;
    std::size_t max_len = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        SceneSpec spec;
        if (trial % 50 == 0) {
            // stretch to the L = 1024 bound exactly
            spec.text_len = 40;
            spec.noise_h = 28;
            spec.noise_w = 28;
            spec.seed = rng.next();
            spec.refs.push_back({10, 10, oracles::random_box(rng), "a"});
            spec.refs.push_back({10, 10, oracles::random_box(rng), "b"});
        } else {
            spec = oracles::random_scene(rng, lim);
        }
        const HorizonMask mask = build_horizon_mask(build_layout(spec), spec);
        const std::size_t len = mask.total_len();
        max_len = std::max(max_len, len);
        const Matrix q = random_rows(rng, len, 16);
        const Matrix k = random_rows(rng, len, 16);
        const Matrix v = random_rows(rng, len, 16);
        const Matrix dense = masked_attention_dense(q, k, v, mask, cfg);
        const Matrix sparse = masked_attention_block_sparse(q, k, v, mask, cfg);
        for (std::size_t i = 0; i < dense.data.size(); ++i) {
            const double denom =
                std::max({std::abs(dense.data[i]), std::abs(sparse.data[i]), 1e-12});
            worst = std::max(worst, std::abs(dense.data[i] - sparse.data[i]) / denom);
        }
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    char buf[160];
    std::snprintf(buf, sizeof(buf), "max relative deviation %.3e, max L %zu, %.1f s", worst,
                  max_len, secs);
    detail = buf;
    return worst <= 1e-6 && secs < 120.0;
}

// ---------------------------------------------------------------------------
// 4. Softmax contract: exact zeros on masked keys, unit row sums, no NaN.

bool softmax_contract(std::string& detail) {
    SplitMix64 rng(404);
    oracles::SceneLimits lim;
    lim.max_text = 24;
    lim.max_noise_side = 10;
    lim.max_refs = 3;
    lim.max_ref_side = 8;
    lim.max_total = 320;
    const AttentionConfig cfg{16, 1};

    std::size_t rows_checked = 0;
    double worst_row_sum = 0.0;
    while (rows_checked < 10000) {
        const SceneSpec spec = oracles::random_scene(rng, lim);
        const HorizonMask mask = build_horizon_mask(build_layout(spec), spec);
        const TokenLayout& layout = mask.layout();
        const std::size_t len = mask.total_len();

        // extreme logits: half the keys are sign patterns of magnitude 0.25
        // (unit norm), a third of the queries are +-50 multiples of them
        Matrix q(len, 16);
        Matrix k(len, 16);
        for (std::size_t t = 0; t < len; ++t) {
            for (std::size_t j = 0; j < 16; ++j) {
                k(t, j) = (rng.next() & 1) ? 0.25 : -0.25;
            }
        }
        for (std::size_t t = 0; t < len; ++t) {
            if (t % 3 == 0) {
                const std::size_t anchor = rng.next() % len;
                const double sign = (rng.next() & 1) ? 50.0 : -50.0;
                for (std::size_t j = 0; j < 16; ++j) {
                    q(t, j) = sign * k(anchor, j);
                }
            } else {
                for (std::size_t j = 0; j < 16; ++j) {
                    q(t, j) = rng.normal();
                }
            }
        }

        // row sums: all-ones values must return exactly-1 rows
        Matrix ones(len, 16);
        for (double& x : ones.data) x = 1.0;
        const Matrix sums = masked_attention_block_sparse(q, k, ones, mask, cfg);
        for (double x : sums.data) {
            if (!std::isfinite(x)) {
                detail = "non-finite row sum";
                return false;
            }
            worst_row_sum = std::max(worst_row_sum, std::abs(x - 1.0));
        }

        // finiteness of ordinary outputs under the same extreme logits
        const Matrix v = random_rows(rng, len, 16);
        const Matrix out = masked_attention_dense(q, k, v, mask, cfg);
        for (double x : out.data) {
            if (!std::isfinite(x)) {
                detail = "non-finite attention output";
                return false;
            }
        }

        // masked weights exactly zero: blasting a blocked reference's value
        // rows must leave blocked query rows bit-identical
        if (!spec.refs.empty()) {
            Matrix v2 = v;
            const Segment& seg = layout.ref_segment(0);
            for (std::size_t r = seg.start; r < seg.start + seg.len; ++r) {
                for (std::size_t j = 0; j < 16; ++j) {
                    v2(r, j) += 1e9;
                }
            }
            const Matrix moved = masked_attention_dense(q, k, v2, mask, cfg);
            for (std::size_t row = 0; row < len; ++row) {
                if (mask.visible(row, seg.start)) continue;
                for (std::size_t j = 0; j < 16; ++j) {
                    if (out(row, j) != moved(row, j)) {
                        detail = "masked key influenced a blocked row";
                        return false;
                    }
                }
            }
        }
        rows_checked += len;
    }
    char buf[120];
    std::snprintf(buf, sizeof(buf), "%zu rows, worst row-sum error %.3e", rows_checked,
                  worst_row_sum);
    detail = buf;
    return worst_row_sum <= 1e-6;
}

// ---------------------------------------------------------------------------
// 5. Block-sparse path is at least as fast as the dense path at L = 4096.

bool sparse_not_slower(std::string& detail) {
    SceneSpec spec;
    spec.text_len = 224;
    spec.noise_h = 48;
    spec.noise_w = 48;
    spec.seed = 505;
    // each box covers well under 25% of the noise grid
    spec.refs.push_back({28, 28, {0.05, 0.05, 0.30, 0.30}, "a"});
    spec.refs.push_back({28, 28, {0.55, 0.55, 0.85, 0.85}, "b"});
    const TokenLayout layout = build_layout(spec);
    if (layout.total_len() != 4096) {
        detail = "scene is not 4096 tokens";
        return false;
    }
    const HorizonMask mask = build_horizon_mask(layout, spec);
    const AttentionConfig cfg{16, kDefaultNumHeads};

    SplitMix64 rng(506);
    std::vector<Matrix> q, k, v;
    for (int h = 0; h < cfg.num_heads; ++h) {
        q.push_back(random_rows(rng, 4096, 16));
        k.push_back(random_rows(rng, 4096, 16));
        v.push_back(random_rows(rng, 4096, 16));
    }
    volatile double sink = 0.0;
    auto time_path = [&](bool dense) {
        double best = 1e300;
        for (int rep = 0; rep < 3; ++rep) {
            const auto t0 = std::chrono::steady_clock::now();
            for (int h = 0; h < cfg.num_heads; ++h) {
                const Matrix out = dense
                                       ? masked_attention_dense(q[h], k[h], v[h], mask, cfg)
                                       : masked_attention_block_sparse(q[h], k[h], v[h], mask, cfg);
                sink = sink + out.data[0];
            }
            best = std::min(best,
                            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
                                .count());
        }
        return best;
    };
    const double dense_s = time_path(true);
    const double sparse_s = time_path(false);
    const double ratio = dense_s / sparse_s;
    char buf[200];
    std::snprintf(buf, sizeof(buf),
                  "dense %.3f s, sparse %.3f s, speedup %.2fx (informational target 1.5x)",
                  dense_s, sparse_s, ratio);
    detail = buf;
    return sparse_s <= dense_s;
}

// ---------------------------------------------------------------------------
// 6. Positional ids are non-overlapping; rotary preserves norms and shifts.

bool positional_contract(std::string& detail) {
    SplitMix64 rng(606);
    for (int trial = 0; trial < 500; ++trial) {
        const SceneSpec spec = oracles::random_scene(rng);
        const TokenLayout layout = build_layout(spec);
        const PositionIds ids = assign_position_ids(layout, spec);
        std::unordered_set<std::uint64_t> seen;
        auto key = [&ids](std::size_t t) {
            return (static_cast<std::uint64_t>(ids.row_ids[t]) << 32) |
                   static_cast<std::uint32_t>(ids.col_ids[t]);
        };
        for (std::size_t n = 0; n < layout.noise_len(); ++n) {
            if (!seen.insert(key(layout.noise_start() + n)).second) {
                detail = "noise ids collide";
                return false;
            }
        }
        for (std::size_t i = 0; i < layout.num_refs(); ++i) {
            const Segment& seg = layout.ref_segment(i);
            for (std::size_t t = seg.start; t < seg.start + seg.len; ++t) {
                if (!seen.insert(key(t)).second) {
                    detail = "reference ids collide";
                    return false;
                }
            }
        }
    }

    double worst_norm = 0.0;
    double worst_shift = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
        Matrix q = random_rows(rng, 1, 16);
        Matrix k = random_rows(rng, 1, 16);
        PositionIds ids_q, ids_k, ids_qs, ids_ks;
        const int qr = static_cast<int>(rng.uniform_int(0, 128));
        const int qc = static_cast<int>(rng.uniform_int(0, 128));
        const int kr = static_cast<int>(rng.uniform_int(0, 128));
        const int kc = static_cast<int>(rng.uniform_int(0, 128));
        const int dr = static_cast<int>(rng.uniform_int(0, 64));
        const int dc = static_cast<int>(rng.uniform_int(0, 64));
        ids_q.row_ids = {qr}; ids_q.col_ids = {qc};
        ids_k.row_ids = {kr}; ids_k.col_ids = {kc};
        ids_qs.row_ids = {qr + dr}; ids_qs.col_ids = {qc + dc};
        ids_ks.row_ids = {kr + dr}; ids_ks.col_ids = {kc + dc};

        const Matrix rq = apply_rotary(q, ids_q);
        const Matrix rk = apply_rotary(k, ids_k);
        const Matrix rqs = apply_rotary(q, ids_qs);
        const Matrix rks = apply_rotary(k, ids_ks);

        auto norm = [](const Matrix& m) {
            double acc = 0.0;
            for (double x : m.data) acc += x * x;
            return std::sqrt(acc);
        };
        worst_norm = std::max(worst_norm, std::abs(norm(rq) - norm(q)) / norm(q));

        auto dot = [](const Matrix& a, const Matrix& b) {
            double acc = 0.0;
            for (std::size_t i = 0; i < a.data.size(); ++i) acc += a.data[i] * b.data[i];
            return acc;
        };
        const double base = dot(rq, rk);
        const double shifted = dot(rqs, rks);
        worst_shift =
            std::max(worst_shift, std::abs(base - shifted) / std::max(1.0, std::abs(base)));
    }
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "500 scenes disjoint; norm err %.3e, shift err %.3e over 1000 pairs",
                  worst_norm, worst_shift);
    detail = buf;
    return worst_norm <= 1e-6 && worst_shift <= 1e-9;
}

// ---------------------------------------------------------------------------
// 7. Filter ordering matches the naive oracle; rank sums; 400 -> 98 yield.

bool filter_oracle(std::string& detail) {
    SplitMix64 rng(707);
    std::vector<ScoreRecord> records(10000);
    for (std::size_t i = 0; i < records.size(); ++i) {
        char id[16];
        std::snprintf(id, sizeof(id), "p%06zu", i);
        records[i].pair_id = id;
        // quantized so ties genuinely occur
        records[i].clip_i = std::round(rng.uniform(-1.0, 1.0) * 64.0) / 64.0;
        records[i].dino = std::round(rng.uniform(-1.0, 1.0) * 64.0) / 64.0;
        records[i].s_vlm = std::round(rng.uniform(0.0, 100.0));
        records[i].s_ds = std::round(rng.uniform(0.0, 100.0));
    }
    const auto ranked = aggregate(records);
    const auto expected = oracles::naive_aggregate_order(records);
    for (std::size_t i = 0; i < ranked.size(); ++i) {
        if (ranked[i].pair_id != expected[i]) {
            detail = "ordering diverges from the oracle at position " + std::to_string(i);
            return false;
        }
    }
    double rv = 0.0, rvlm = 0.0, rds = 0.0;
    for (const RankedRecord& r : ranked) {
        rv += r.r_v;
        rvlm += r.r_vlm;
        rds += r.r_ds;
    }
    const double want = 10000.0 * 10001.0 / 2.0;
    if (rv != want || rvlm != want || rds != want) {
        detail = "rank-sum identity violated";
        return false;
    }

    const std::vector<ScoreRecord> fixture(records.begin(), records.begin() + 400);
    const auto kept =
        select_pairs(aggregate(fixture), {SelectionPolicy::Kind::TopFraction, 0.245});
    if (kept.size() != 98) {
        detail = "expected 98 kept, got " + std::to_string(kept.size());
        return false;
    }
    detail = "10000-record ordering exact, rank sums exact, 400@0.245 keeps 98";
    return true;
}

// ---------------------------------------------------------------------------
// 8. Metric oracle: iou fixture, AP vs prefix enumeration, hand fixture.

bool metric_oracle(std::string& detail) {
    if (std::abs(iou({0.0, 0.0, 0.5, 0.5}, {0.25, 0.25, 0.75, 0.75}) - 1.0 / 7.0) > 1e-9) {
        detail = "iou fixture failed";
        return false;
    }

    SplitMix64 rng(808);
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        // synthetic matched datasets with <= 20 detections
        std::vector<SceneMatch> matches;
        const int scenes = static_cast<int>(rng.uniform_int(1, 5));
        std::size_t dets = 0;
        for (int s = 0; s < scenes; ++s) {
            SceneMatch m;
            m.scene_id = "s" + std::to_string(s);
            const int subjects = static_cast<int>(rng.uniform_int(1, 3));
            for (int g = 0; g < subjects; ++g) {
                SceneMatch::GtResult gt;
                if (dets < 20 && rng.uniform() < 0.75) {
                    SceneMatch::DetResult d;
                    d.gt_index = g;
                    d.iou = rng.uniform(0.0, 1.0);
                    d.confidence = std::round(rng.uniform(0.0, 1.0) * 10.0) / 10.0;
                    gt.det_index = static_cast<int>(m.det.size());
                    gt.iou = d.iou;
                    m.det.push_back(d);
                    ++dets;
                }
                m.gt.push_back(gt);
            }
            while (dets < 20 && rng.uniform() < 0.25) {
                SceneMatch::DetResult d;
                d.confidence = std::round(rng.uniform(0.0, 1.0) * 10.0) / 10.0;
                m.det.push_back(d);
                ++dets;
            }
            matches.push_back(std::move(m));
        }
        for (int i = 0; i <= 9; ++i) {
            const double t = 0.5 + 0.05 * i;
            worst = std::max(worst, std::abs(average_precision(matches, t) -
                                             oracles::prefix_ap_oracle(matches, t)));
        }
    }
    if (worst > 1e-9) {
        detail = "AP deviates from the prefix oracle by " + std::to_string(worst);
        return false;
    }

    // hand-computed fixture: IoUs 0.8 (conf 0.9) and 0.6 (conf 0.8), 2 GT
    std::vector<SceneMatch> fixture(1);
    fixture[0].scene_id = "s";
    fixture[0].gt = {{0, 0.8}, {1, 0.6}};
    fixture[0].det = {{0, 0.8, 0.9}, {1, 0.6, 0.8}};
    const ApResult ap = compute_ap(fixture);
    if (ap.ap50 != 1.0 || ap.ap70 != 0.5) {
        detail = "hand fixture gave ap50/ap70 " + std::to_string(ap.ap50) + "/" +
                 std::to_string(ap.ap70);
        return false;
    }

    // self-detection scores 1.0 everywhere
    const auto scenes = generate_bench(10, 10, 3);
    std::vector<DetectionRecord> det;
    for (const GroundTruthRecord& g : scenes) {
        DetectionRecord d;
        d.scene_id = g.scene_id;
        for (const GtSubject& s : g.subjects) {
            d.detections.push_back({s.category, s.box, 1.0});
        }
        det.push_back(std::move(d));
    }
    const BenchReport report = evaluate_bench(scenes, det);
    if (report.iou_mean != 1.0 || report.miou != 1.0 || report.ap != 1.0 ||
        report.ap50 != 1.0 || report.ap70 != 1.0) {
        detail = "self-detection did not score 1.0";
        return false;
    }
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "iou 1/7 exact, AP oracle max dev %.2e, fixture 1.0/0.5, self-detect 1.0",
                  worst);
    detail = buf;
    return true;
}

// ---------------------------------------------------------------------------
// 9. Benchmark generator: paper-scale counts, constraints, reproducibility.

bool generator_contract(std::string& detail) {
    const auto a = generate_bench(252, 296, 0);
    try {
        validate_bench(a, 252, 296);
    } catch (const Error& e) {
        detail = std::string("validator rejected the default benchmark: ") + e.what();
        return false;
    }
    const auto b = generate_bench(252, 296, 0);
    if (gt_to_jsonl(a) != gt_to_jsonl(b)) {
        detail = "same seed produced different bytes";
        return false;
    }
    std::size_t single = 0;
    std::size_t multi = 0;
    for (const GroundTruthRecord& scene : a) {
        (scene.subjects.size() == 1 ? single : multi) += 1;
    }
    if (single != 252 || multi != 296) {
        detail = "counts " + std::to_string(single) + "/" + std::to_string(multi);
        return false;
    }
    detail = "252 single + 296 multi, validator green, byte-identical reruns";
    return true;
}

// ---------------------------------------------------------------------------
// 10. CLI determinism: byte-identical outputs for every subcommand but perf.

struct CliRun {
    int exit_code;
    std::string out;
};

CliRun run_cli(const std::string& args, const fs::path& dir) {
    const fs::path out_file = dir / "stdout.cap";
    const std::string cmd = g_cli_path + " " + args + " > " + out_file.string() + " 2> /dev/null";
    const int status = std::system(cmd.c_str());
    std::ifstream in(out_file, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, ss.str()};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

bool cli_determinism(std::string& detail) {
    const fs::path dir =
        fs::temp_directory_path() / ("horizon_accept_" + std::to_string(::getpid()));
    fs::create_directories(dir);
    struct Cleanup {
        fs::path dir;
        ~Cleanup() {
            std::error_code ec;
            fs::remove_all(dir, ec);
        }
    } cleanup{dir};

    // fixtures
    const std::string scene =
        R"({"text_len":4,"noise_h":6,"noise_w":6,"seed":11,"refs":[{"grid_h":2,"grid_w":2,)"
        R"("category":"dog","box":[0.1,0.1,0.45,0.45]},{"grid_h":2,"grid_w":3,)"
        R"("category":"cat","box":[0.5,0.5,0.95,0.9]}]})";
    std::ofstream(dir / "scene.json") << scene;
    {
        SplitMix64 rng(12);
        std::ofstream scores(dir / "scores.jsonl");
        for (int i = 0; i < 120; ++i) {
            scores << R"({"pair_id":"p)" << 100 + i << R"(","clip_i":)"
                   << std::round(rng.uniform(-1, 1) * 32) / 32 << R"(,"dino":)"
                   << std::round(rng.uniform(-1, 1) * 32) / 32 << R"(,"s_vlm":)"
                   << rng.uniform_int(0, 9) << R"(,"s_ds":)" << rng.uniform_int(0, 9) << "}\n";
        }
    }
    run_cli("bench-gen --single 8 --multi 8 --seed 2 --out " + (dir / "gt.jsonl").string(), dir);
    {
        // echo ground truth as detections
        std::istringstream gt_in(slurp(dir / "gt.jsonl"));
        std::ofstream det(dir / "det.jsonl");
        std::string line;
        while (std::getline(gt_in, line)) {
            const std::size_t at = line.find("\"subjects\"");
            line.replace(at, 10, "\"detections\"");
            det << line << "\n";
        }
    }

    struct Step {
        std::string name;
        std::string args;
        std::vector<std::string> files;
    };
    const std::vector<Step> steps = {
        {"mask-build",
         "mask-build " + (dir / "scene.json").string() + " --out " + (dir / "mask.json").string() +
             " --pgm " + (dir / "mask.pgm").string(),
         {"mask.json", "mask.pgm"}},
        {"attn-check",
         "attn-check " + (dir / "scene.json").string() + " --trials 2 --seed 3 --out " +
             (dir / "attn.json").string(),
         {"attn.json"}},
        {"filter",
         "filter " + (dir / "scores.jsonl").string() + " --policy top_fraction=0.25 --out " +
             (dir / "ranked.jsonl").string(),
         {"ranked.jsonl"}},
        {"bench",
         "bench " + (dir / "gt.jsonl").string() + " " + (dir / "det.jsonl").string() + " --out " +
             (dir / "report.json").string(),
         {"report.json"}},
        {"bench-gen",
         "bench-gen --single 8 --multi 8 --seed 2 --out " + (dir / "gen.jsonl").string(),
         {"gen.jsonl"}},
    };

    for (const Step& step : steps) {
        const CliRun first = run_cli(step.args, dir);
        if (first.exit_code != 0) {
            detail = step.name + " exited " + std::to_string(first.exit_code);
            return false;
        }
        std::vector<std::string> bytes;
        for (const std::string& f : step.files) {
            bytes.push_back(slurp(dir / f));
        }
        const CliRun second = run_cli(step.args, dir);
        if (second.exit_code != 0 || second.out != first.out) {
            detail = step.name + " stdout differs between runs";
            return false;
        }
        for (std::size_t i = 0; i < step.files.size(); ++i) {
            if (slurp(dir / step.files[i]) != bytes[i]) {
                detail = step.name + " output file " + step.files[i] + " differs between runs";
                return false;
            }
        }
    }
    detail = "5 subcommands byte-identical across reruns";
    return true;
}

} // namespace

int main(int argc, char** argv) {
    if (argc < 2) {
        std::cerr << "usage: horizon_acceptance <path-to-cli-binary>\n";
        return 2;
    }
    g_cli_path = argv[1];

    const std::vector<Criterion> criteria = {
        {1, "mask oracle equivalence (1000 scenes, bit-exact, <10s)", mask_oracle_equivalence},
        {2, "zero leakage through blocked rows (200 scenes, <=1e-12, <60s)", zero_leakage},
        {3, "dense/sparse kernel equivalence (1000 scenes, <=1e-6 rel, <120s)",
         dense_sparse_equivalence},
        {4, "softmax contract (exact masked zeros, unit rows, finite)", softmax_contract},
        {5, "block-sparse path not slower at L=4096", sparse_not_slower},
        {6, "positional non-overlap + rotary norm/shift invariance", positional_contract},
        {7, "filter ordering oracle + rank sums + 400->98 yield", filter_oracle},
        {8, "metric oracle (iou, AP prefix enumeration, fixtures)", metric_oracle},
        {9, "benchmark generator contract (252/296, validated, reproducible)",
         generator_contract},
        {10, "CLI determinism (all subcommands except perf)", cli_determinism},
    };

    int failures = 0;
    for (const Criterion& c : criteria) {
        std::string detail;
        bool ok = false;
        try {
            ok = c.check(detail);
        } catch (const std::exception& e) {
            detail = std::string("exception: ") + e.what();
        }
        std::printf("[%s] %2d. %s — %s\n", ok ? "PASS" : "FAIL", c.number, c.name,
                    detail.c_str());
        std::fflush(stdout);
        if (!ok) ++failures;
    }
    std::printf("acceptance: %zu/%zu criteria passed\n", criteria.size() - failures,
                criteria.size());
    return failures == 0 ? 0 : 1;
}
