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

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "horizon/attn.hpp"
#include "horizon/bench.hpp"
#include "horizon/filter.hpp"
#include "horizon/json_io.hpp"
#include "horizon/mask.hpp"
#include "horizon/rng.hpp"
#include "horizon/rope.hpp"
#include "horizon/scene.hpp"

#ifdef __linux__
#include <sched.h>
#endif

namespace {

using horizon::AttentionConfig;
using horizon::AttentionPath;
using horizon::Error;
using horizon::HorizonMask;
using horizon::Matrix;
using horizon::PositionIds;
using horizon::SceneSpec;
using horizon::SplitMix64;
using horizon::TokenLayout;
using horizon::TokenTensor;
using ordered_json = nlohmann::ordered_json;

constexpr int kExitCheckFailure = 1;
constexpr int kExitInputError = 2;

std::size_t resolve_dense_limit(std::optional<std::size_t> flag_value) {
    if (flag_value) {
        return *flag_value;
    }
    if (const char* env = std::getenv("HORIZON_DENSE_LIMIT")) {
        try {
            return static_cast<std::size_t>(std::stoull(env));
        } catch (const std::exception&) {
            throw Error(horizon::ErrorKind::BadPolicy,
                        std::string("HORIZON_DENSE_LIMIT is not a number: ") + env);
        }
    }
    return horizon::kDefaultDenseLimit;
}

SceneSpec load_scene(const std::string& path) {
    return horizon::scene_from_json_text(horizon::read_file(path));
}

// ---------------------------------------------------------------- mask-build

int cmd_mask_build(const std::string& scene_path, const std::string& out_path,
                   const std::string& pgm_path, std::optional<std::size_t> dense_limit_flag) {
    const SceneSpec spec = load_scene(scene_path);
    const TokenLayout layout = horizon::build_layout(spec);
    const HorizonMask mask = horizon::build_horizon_mask(layout, spec);

    if (!out_path.empty()) {
        horizon::write_file(out_path, horizon::mask_to_json_text(mask));
    }
    if (!pgm_path.empty()) {
        const std::size_t limit = resolve_dense_limit(dense_limit_flag);
        const std::vector<std::uint8_t> dense = horizon::materialize_dense(mask, limit);
        std::ofstream out(pgm_path, std::ios::binary);
        if (!out) {
            throw Error(horizon::ErrorKind::IoError, "cannot write " + pgm_path);
        }
        horizon::write_pgm(out, dense, mask.total_len());
    }
    std::cout << horizon::visibility_stats_to_json_text(horizon::visibility_stats(mask)) << "\n";
    return 0;
}

// ----------------------------------------------------------------- attn-check

struct CheckOutcome {
    double leakage_max = 0.0;
    double row_sum_max_err = 0.0;
    double dense_sparse_max_rel = 0.0;
    bool pass = true;
    ordered_json counterexample; // first failure only
};

Matrix random_matrix(SplitMix64& rng, std::size_t rows, std::size_t cols) {
    Matrix m(rows, cols);
    for (double& x : m.data) {
        x = rng.normal();
    }
    return m;
}

// Flips the first blocked visibility bit of some reference, used to verify
// that the checker actually detects a leaky mask.
HorizonMask broken_mask(const HorizonMask& mask) {
    for (std::size_t i = 0; i < mask.num_refs(); ++i) {
        for (std::size_t n = 0; n < mask.layout().noise_len(); ++n) {
            if (!mask.ref_sees_patch(i, n)) {
                std::vector<horizon::Bitmap> bitmaps;
                for (std::size_t r = 0; r < mask.num_refs(); ++r) {
                    bitmaps.push_back(mask.ref_visibility(r));
                }
                bitmaps[i].set(n);
                return HorizonMask(mask.layout(), std::move(bitmaps));
            }
        }
    }
    throw Error(horizon::ErrorKind::BadConstraints,
                "--break-mask needs a reference with at least one blocked noise patch");
}

int cmd_attn_check(const std::string& scene_path, int trials, std::uint64_t seed, bool break_mask,
                   const std::string& out_path) {
    const SceneSpec spec = load_scene(scene_path);
    const TokenLayout layout = horizon::build_layout(spec);
    const HorizonMask mask = horizon::build_horizon_mask(layout, spec);
    const PositionIds ids = horizon::assign_position_ids(layout, spec);
    const std::size_t len = layout.total_len();

    const auto params =
        horizon::DoubleStreamParams::seeded(seed * 0x9E3779B97F4A7C15ULL + 1, horizon::kDefaultWidth,
                                            horizon::kDefaultNumHeads);
    const TokenTensor tokens = horizon::synth_tokens(spec, horizon::kDefaultWidth);
    const TokenTensor baseline =
        horizon::double_stream_forward(tokens, mask, ids, params, AttentionPath::BlockSparse);

    CheckOutcome outcome;
    const HorizonMask leak_mask = break_mask ? broken_mask(mask) : mask;

    // Leakage: perturbing one reference's rows must not move any output row
    // whose mask row blocks that reference.
    for (int t = 0; t < trials && outcome.pass; ++t) {
        for (std::size_t i = 0; i < layout.num_refs() && outcome.pass; ++i) {
            TokenTensor mutated = tokens;
            SplitMix64 rng(seed ^ (0xABCD0000ULL + 1000 * static_cast<std::uint64_t>(t) + i));
            const horizon::Segment& seg = layout.ref_segment(i);
            for (std::size_t r = seg.start; r < seg.start + seg.len; ++r) {
                for (std::size_t c = 0; c < mutated.values.cols; ++c) {
                    mutated.values(r, c) = rng.normal();
                }
            }
            const TokenTensor out = horizon::double_stream_forward(mutated, leak_mask, ids, params,
                                                                   AttentionPath::BlockSparse);
            for (std::size_t row = 0; row < len; ++row) {
                bool protected_row = false;
                if (row >= layout.noise_start() && row < layout.noise_start() + layout.noise_len()) {
                    protected_row = !mask.ref_sees_patch(i, row - layout.noise_start());
                } else {
                    for (std::size_t j = 0; j < layout.num_refs(); ++j) {
                        if (j == i) continue;
                        const horizon::Segment& other = layout.ref_segment(j);
                        if (row >= other.start && row < other.start + other.len) {
                            protected_row = true;
                            break;
                        }
                    }
                }
                if (!protected_row) continue;
                for (std::size_t c = 0; c < baseline.values.cols; ++c) {
                    const double dev = std::abs(baseline.values(row, c) - out.values(row, c));
                    if (dev > outcome.leakage_max) outcome.leakage_max = dev;
                    if (dev > 1e-12 && outcome.pass) {
                        outcome.pass = false;
                        outcome.counterexample = {{"suite", "leakage"}, {"trial", t},
                                                  {"ref", i},           {"row", row},
                                                  {"col", c},           {"deviation", dev}};
                    }
                }
            }
        }
    }

    // Row-stochastic weights: with V all-ones every output row must be 1.
    {
        const AttentionConfig cfg{16, 1};
        SplitMix64 rng(seed ^ 0xFEEDULL);
        const Matrix q = random_matrix(rng, len, 16);
        const Matrix k = random_matrix(rng, len, 16);
        Matrix ones(len, 16);
        for (double& x : ones.data) x = 1.0;
        for (const Matrix& out : {horizon::masked_attention_dense(q, k, ones, mask, cfg),
                                  horizon::masked_attention_block_sparse(q, k, ones, mask, cfg)}) {
            for (std::size_t idx = 0; idx < out.data.size(); ++idx) {
                const double err = std::abs(out.data[idx] - 1.0);
                if (err > outcome.row_sum_max_err) outcome.row_sum_max_err = err;
                if (err > 1e-6 && outcome.pass) {
                    outcome.pass = false;
                    outcome.counterexample = {{"suite", "row_sum"},
                                              {"row", idx / out.cols},
                                              {"deviation", err}};
                }
            }
        }
    }

    // Dense and block-sparse paths must agree per element.
    {
        const AttentionConfig cfg{16, 1};
        SplitMix64 rng(seed ^ 0xD15EULL);
        const Matrix q = random_matrix(rng, len, 16);
        const Matrix k = random_matrix(rng, len, 16);
        const Matrix v = random_matrix(rng, len, 16);
        const Matrix dense = horizon::masked_attention_dense(q, k, v, mask, cfg);
        const Matrix sparse = horizon::masked_attention_block_sparse(q, k, v, mask, cfg);
        for (std::size_t idx = 0; idx < dense.data.size(); ++idx) {
            const double denom =
                std::max({std::abs(dense.data[idx]), std::abs(sparse.data[idx]), 1e-12});
            const double rel = std::abs(dense.data[idx] - sparse.data[idx]) / denom;
            if (rel > outcome.dense_sparse_max_rel) outcome.dense_sparse_max_rel = rel;
            if (rel > 1e-6 && outcome.pass) {
                outcome.pass = false;
                outcome.counterexample = {{"suite", "dense_sparse"},
                                          {"row", idx / dense.cols},
                                          {"deviation", rel}};
            }
        }
    }

    ordered_json report;
    report["scene"] = scene_path;
    report["trials"] = trials;
    report["seed"] = seed;
    report["break_mask"] = break_mask;
    report["leakage_max"] = outcome.leakage_max;
    report["row_sum_max_err"] = outcome.row_sum_max_err;
    report["dense_sparse_max_rel"] = outcome.dense_sparse_max_rel;
    report["pass"] = outcome.pass;
    if (!outcome.pass) {
        report["counterexample"] = outcome.counterexample;
    }
    const std::string text = report.dump(2) + "\n";
    if (!out_path.empty()) {
        horizon::write_file(out_path, text);
    }
    std::cout << text;
    return outcome.pass ? 0 : kExitCheckFailure;
}

// ----------------------------------------------------------------------- perf

// Two-reference scene with small boxes, sized to exactly `total` tokens.
SceneSpec perf_scene(std::size_t total, std::uint64_t seed) {
    const int noise_side = std::max(1, static_cast<int>(std::sqrt(0.5625 * static_cast<double>(total))));
    const std::size_t noise = static_cast<std::size_t>(noise_side) * noise_side;
    int ref_side = std::max(1, static_cast<int>(std::sqrt(0.19 * static_cast<double>(total))));
    while (ref_side > 1 &&
           noise + 2 * static_cast<std::size_t>(ref_side) * ref_side > total) {
        --ref_side;
    }
    const std::size_t refs = 2 * static_cast<std::size_t>(ref_side) * ref_side;
    if (noise + refs > total) {
        throw Error(horizon::ErrorKind::BadConstraints,
                    "perf size too small for the canonical scene");
    }
    SceneSpec spec;
    spec.text_len = static_cast<int>(total - noise - refs);
    spec.noise_h = noise_side;
    spec.noise_w = noise_side;
    spec.seed = seed;
    spec.refs.push_back({ref_side, ref_side, {0.05, 0.05, 0.30, 0.30}, "subject-a"});
    spec.refs.push_back({ref_side, ref_side, {0.55, 0.55, 0.85, 0.85}, "subject-b"});
    return spec;
}

int cmd_perf(const std::vector<std::size_t>& sizes, int reps, std::uint64_t seed,
             const std::string& out_path, bool cpu_pin) {
    if (cpu_pin) {
#ifdef __linux__
        cpu_set_t set;
        CPU_ZERO(&set);
        CPU_SET(0, &set);
        if (sched_setaffinity(0, sizeof(set), &set) != 0) {
            std::cerr << "warning: could not pin to cpu 0\n";
        }
#else
        std::cerr << "warning: --cpu-pin is only supported on Linux\n";
#endif
    }

    std::ostringstream lines;
    for (const std::size_t total : sizes) {
        if (total > horizon::kDefaultMaxSequenceLen) {
            std::cerr << "warning: skipping L=" << total << " (over the sequence budget of "
                      << horizon::kDefaultMaxSequenceLen << ")\n";
            continue;
        }
        const SceneSpec spec = perf_scene(total, seed);
        const TokenLayout layout = horizon::build_layout(spec);
        const HorizonMask mask = horizon::build_horizon_mask(layout, spec);
        const double ones_fraction = horizon::visibility_stats(mask).ones_fraction;

        const AttentionConfig cfg{16, horizon::kDefaultNumHeads};
        SplitMix64 rng(seed ^ total);
        std::vector<Matrix> q, k, v;
        for (int h = 0; h < cfg.num_heads; ++h) {
            q.push_back(random_matrix(rng, total, 16));
            k.push_back(random_matrix(rng, total, 16));
            v.push_back(random_matrix(rng, total, 16));
        }

        volatile double sink = 0.0;
        auto time_path = [&](AttentionPath path) {
            std::int64_t best = -1;
            for (int r = 0; r < reps; ++r) {
                const auto start = std::chrono::steady_clock::now();
                for (int h = 0; h < cfg.num_heads; ++h) {
                    const Matrix out =
                        path == AttentionPath::Dense
                            ? horizon::masked_attention_dense(q[h], k[h], v[h], mask, cfg)
                            : horizon::masked_attention_block_sparse(q[h], k[h], v[h], mask, cfg);
                    sink = sink + out.data[0];
                }
                const auto stop = std::chrono::steady_clock::now();
                const std::int64_t ns =
                    std::chrono::duration_cast<std::chrono::nanoseconds>(stop - start).count();
                if (best < 0 || ns < best) best = ns;
            }
            return best;
        };

        const std::int64_t dense_ns = time_path(AttentionPath::Dense);
        const std::int64_t sparse_ns = time_path(AttentionPath::BlockSparse);
        for (const auto& [name, ns] :
             {std::pair<const char*, std::int64_t>{"dense", dense_ns}, {"sparse", sparse_ns}}) {
            ordered_json j;
            j["path"] = name;
            j["L"] = total;
            j["ones_fraction"] = ones_fraction;
            j["wall_ns"] = ns;
            lines << j.dump() << "\n";
        }
        std::cerr << "L=" << total << " dense/sparse wall-time ratio: "
                  << static_cast<double>(dense_ns) / static_cast<double>(sparse_ns) << "\n";
    }

    if (!out_path.empty()) {
        horizon::write_file(out_path, lines.str());
    } else {
        std::cout << lines.str();
    }
    return 0;
}

// --------------------------------------------------------------------- filter

int cmd_filter(const std::string& scores_path, const std::string& policy_text,
               const std::string& out_path) {
    const horizon::SelectionPolicy policy = horizon::SelectionPolicy::parse(policy_text);
    std::ifstream in(scores_path);
    if (!in) {
        throw Error(horizon::ErrorKind::IoError, "cannot read " + scores_path);
    }
    const std::vector<horizon::ScoreRecord> records = horizon::read_score_jsonl(in);
    const std::vector<horizon::RankedRecord> ranked = horizon::aggregate(records);
    const std::vector<std::string> kept = horizon::select_pairs(ranked, policy);
    const std::string text = horizon::ranked_to_jsonl(ranked, kept);
    if (!out_path.empty()) {
        horizon::write_file(out_path, text);
        std::cout << "kept " << kept.size() << " of " << ranked.size() << " pairs\n";
    } else {
        std::cout << text;
    }
    return 0;
}

// ---------------------------------------------------------------------- bench

int cmd_bench(const std::string& gt_path, const std::string& det_path,
              const std::string& out_path) {
    std::ifstream gt_in(gt_path);
    if (!gt_in) {
        throw Error(horizon::ErrorKind::IoError, "cannot read " + gt_path);
    }
    std::ifstream det_in(det_path);
    if (!det_in) {
        throw Error(horizon::ErrorKind::IoError, "cannot read " + det_path);
    }
    const auto gt = horizon::read_gt_jsonl(gt_in);
    const auto det = horizon::read_det_jsonl(det_in);
    const horizon::BenchReport report = horizon::evaluate_bench(gt, det);

    std::cout << horizon::bench_report_to_table(report);
    if (!report.missing_scenes.empty()) {
        std::cout << "note: " << report.missing_scenes.size()
                  << " scene(s) had no detections and score 0\n";
    }
    if (!out_path.empty()) {
        horizon::write_file(out_path, horizon::bench_report_to_json_text(report));
    } else {
        std::cout << horizon::bench_report_to_json_text(report);
    }
    return 0;
}

// ------------------------------------------------------------------ bench-gen

int cmd_bench_gen(int count_single, int count_multi, std::uint64_t seed,
                  const std::string& out_path) {
    const auto scenes = horizon::generate_bench(count_single, count_multi, seed);
    horizon::validate_bench(scenes, count_single, count_multi);
    const std::string text = horizon::gt_to_jsonl(scenes);
    if (!out_path.empty()) {
        horizon::write_file(out_path, text);
        std::cout << "wrote " << scenes.size() << " scenes\n";
    } else {
        std::cout << text;
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"regional attention-horizon masks, rank-aggregation filtering, and "
                 "layout-control metrics"};
    app.require_subcommand(1);

    // mask-build
    std::string mb_scene, mb_out, mb_pgm;
    std::optional<std::size_t> mb_dense_limit;
    auto* mask_build = app.add_subcommand("mask-build", "build the visibility mask for a scene");
    mask_build->add_option("scene", mb_scene, "scene spec JSON file")->required();
    mask_build->add_option("--out", mb_out, "write the block-structure mask JSON here");
    mask_build->add_option("--pgm", mb_pgm, "write a dense PGM image of the mask here");
    mask_build->add_option("--dense-limit", mb_dense_limit,
                           "dense materialization cap (default 8192; env HORIZON_DENSE_LIMIT)");

    // attn-check
    std::string ac_scene, ac_out;
    int ac_trials = 8;
    std::uint64_t ac_seed = 0;
    bool ac_break_mask = false;
    auto* attn_check =
        app.add_subcommand("attn-check", "run leakage/row-sum/equivalence checks on a scene");
    attn_check->add_option("scene", ac_scene, "scene spec JSON file")->required();
    attn_check->add_option("--trials", ac_trials, "perturbation trials per reference (default 8)");
    attn_check->add_option("--seed", ac_seed, "seed for probes and parameters (default 0)");
    attn_check->add_flag("--break-mask", ac_break_mask,
                         "inject a mask fault to verify the checker fails");
    attn_check->add_option("--out", ac_out, "also write the report JSON here");

    // perf
    std::vector<std::size_t> pf_sizes{1024, 4096};
    int pf_reps = 3;
    std::uint64_t pf_seed = 0;
    std::string pf_out;
    bool pf_pin = false;
    auto* perf = app.add_subcommand("perf", "time the dense vs block-sparse attention paths");
    perf->add_option("--sizes", pf_sizes, "sequence lengths to measure (default 1024 4096)");
    perf->add_option("--reps", pf_reps, "repetitions per measurement, best kept (default 3)");
    perf->add_option("--seed", pf_seed, "seed for scene content (default 0)");
    perf->add_option("--out", pf_out, "write JSONL report here instead of stdout");
    perf->add_flag("--cpu-pin", pf_pin, "pin to cpu 0; reduces timing variance only");

    // filter
    std::string fl_scores, fl_policy = "top_fraction=0.245", fl_out;
    auto* filter = app.add_subcommand("filter", "rank score records and select kept pairs");
    filter->add_option("scores", fl_scores, "score records JSONL file")->required();
    filter->add_option("--policy", fl_policy,
                       "top_k=N | top_fraction=F | rank_threshold=R (default top_fraction=0.245)");
    filter->add_option("--out", fl_out, "write ranked JSONL here instead of stdout");

    // bench
    std::string bn_gt, bn_det, bn_out;
    auto* bench = app.add_subcommand("bench", "score detections against ground truth");
    bench->add_option("gt", bn_gt, "ground-truth JSONL file")->required();
    bench->add_option("det", bn_det, "detections JSONL file")->required();
    bench->add_option("--out", bn_out, "write the report JSON here instead of stdout");

    // bench-gen
    int bg_single = 252;
    int bg_multi = 296;
    std::uint64_t bg_seed = 0;
    std::string bg_out;
    auto* bench_gen = app.add_subcommand("bench-gen", "generate a constrained benchmark");
    bench_gen->add_option("--single", bg_single, "single-subject scene count (default 252)");
    bench_gen->add_option("--multi", bg_multi, "multi-subject scene count (default 296)");
    bench_gen->add_option("--seed", bg_seed, "generator seed (default 0)");
    bench_gen->add_option("--out", bg_out, "write ground-truth JSONL here instead of stdout");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitInputError;
    }

    try {
        if (mask_build->parsed()) {
            return cmd_mask_build(mb_scene, mb_out, mb_pgm, mb_dense_limit);
        }
        if (attn_check->parsed()) {
            return cmd_attn_check(ac_scene, ac_trials, ac_seed, ac_break_mask, ac_out);
        }
        if (perf->parsed()) {
            return cmd_perf(pf_sizes, pf_reps, pf_seed, pf_out, pf_pin);
        }
        if (filter->parsed()) {
            return cmd_filter(fl_scores, fl_policy, fl_out);
        }
        if (bench->parsed()) {
            return cmd_bench(bn_gt, bn_det, bn_out);
        }
        if (bench_gen->parsed()) {
            return cmd_bench_gen(bg_single, bg_multi, bg_seed, bg_out);
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInputError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInputError;
    }
    return 0;
}
