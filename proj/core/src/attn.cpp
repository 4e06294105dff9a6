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

#include "horizon/attn.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "horizon/rng.hpp"

namespace horizon {

namespace {

double dot(const double* a, const double* b, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        acc += a[i] * b[i];
    }
    return acc;
}

void check_shapes(const Matrix& q, const Matrix& k, const Matrix& v, const HorizonMask& mask,
                  const AttentionConfig& cfg) {
    cfg.validate();
    if (!q.same_shape(k) || !q.same_shape(v)) {
        throw Error(ErrorKind::ShapeMismatch, "q, k, v must share one L x head_dim shape");
    }
    if (q.cols != static_cast<std::size_t>(cfg.head_dim)) {
        throw Error(ErrorKind::ShapeMismatch, "column count must equal head_dim");
    }
    if (q.rows != mask.total_len()) {
        throw Error(ErrorKind::ShapeMismatch, "row count must equal the mask sequence length");
    }
}

// Contiguous key spans plus optional individual key indices, visited in
// ascending token order. Shared by both kernel paths so partial sums agree.
struct VisibleKeys {
    struct Span {
        std::size_t start;
        std::size_t len;
    };
    std::vector<Span> spans;

    template <typename Fn>
    void for_each(Fn&& fn) const {
        for (const Span& s : spans) {
            for (std::size_t k = s.start; k < s.start + s.len; ++k) {
                fn(k);
            }
        }
    }

    std::size_t count() const {
        std::size_t n = 0;
        for (const Span& s : spans) n += s.len;
        return n;
    }
};

} // namespace

double AttentionConfig::scale() const { return 1.0 / std::sqrt(static_cast<double>(head_dim)); }

void AttentionConfig::validate() const {
    if (head_dim < 4 || head_dim % 2 != 0) {
        throw Error(ErrorKind::BadDimension, "head_dim must be even and at least 4");
    }
    if (num_heads < 1) {
        throw Error(ErrorKind::BadDimension, "num_heads must be positive");
    }
}

Matrix masked_attention_dense(const Matrix& q, const Matrix& k, const Matrix& v,
                              const HorizonMask& mask, const AttentionConfig& cfg) {
    check_shapes(q, k, v, mask, cfg);
    const std::size_t len = q.rows;
    const std::size_t d = q.cols;
    const double scale = cfg.scale();

    Matrix out(len, d);
    std::vector<double> weight(len);
    std::vector<std::uint8_t> vis(len);

    for (std::size_t qi = 0; qi < len; ++qi) {
        const double* qrow = q.row(qi);
        for (std::size_t ki = 0; ki < len; ++ki) {
            weight[ki] = dot(qrow, k.row(ki), d) * scale;
            vis[ki] = mask.visible(qi, ki) ? 1 : 0;
        }

        double max_logit = -std::numeric_limits<double>::infinity();
        for (std::size_t ki = 0; ki < len; ++ki) {
            if (vis[ki] && weight[ki] > max_logit) max_logit = weight[ki];
        }
        if (max_logit == -std::numeric_limits<double>::infinity()) {
            throw Error(ErrorKind::AllMaskedRow, "query row " + std::to_string(qi) +
                                                     " has no visible key");
        }

        double sum = 0.0;
        for (std::size_t ki = 0; ki < len; ++ki) {
            weight[ki] = vis[ki] ? std::exp(weight[ki] - max_logit) : 0.0;
            sum += weight[ki];
        }
        const double inv = 1.0 / sum;

        double* orow = out.row(qi);
        for (std::size_t ki = 0; ki < len; ++ki) {
            const double w = weight[ki] * inv;
            const double* vrow = v.row(ki);
            for (std::size_t j = 0; j < d; ++j) {
                orow[j] += w * vrow[j];
            }
        }
    }
    return out;
}

Matrix masked_attention_block_sparse(const Matrix& q, const Matrix& k, const Matrix& v,
                                     const HorizonMask& mask, const AttentionConfig& cfg) {
    check_shapes(q, k, v, mask, cfg);
    const TokenLayout& layout = mask.layout();
    const std::size_t len = q.rows;
    const std::size_t d = q.cols;
    const double scale = cfg.scale();
    const std::size_t num_refs = mask.num_refs();

    // Per-reference visible patch lists, folded into absolute-token spans of
    // consecutive visible noise cells.
    std::vector<VisibleKeys> ref_noise_spans(num_refs);
    for (std::size_t i = 0; i < num_refs; ++i) {
        const Bitmap& bits = mask.ref_visibility(i);
        const std::size_t noise_start = layout.noise_start();
        std::size_t run_start = 0;
        std::size_t run_len = 0;
        for (std::size_t n = 0; n < bits.size(); ++n) {
            if (bits.get(n)) {
                if (run_len == 0) run_start = n;
                ++run_len;
            } else if (run_len > 0) {
                ref_noise_spans[i].spans.push_back({noise_start + run_start, run_len});
                run_len = 0;
            }
        }
        if (run_len > 0) {
            ref_noise_spans[i].spans.push_back({noise_start + run_start, run_len});
        }
    }

    Matrix out(len, d);
    std::vector<double> buf(len);

    VisibleKeys keys;
    for (const Segment& seg : layout.segments()) {
        for (std::size_t qi = seg.start; qi < seg.start + seg.len; ++qi) {
            keys.spans.clear();
            switch (seg.kind) {
            case SegmentKind::Text:
                keys.spans.push_back({0, len});
                break;
            case SegmentKind::Noise: {
                keys.spans.push_back({0, layout.noise_start() + layout.noise_len()});
                const std::size_t patch = qi - layout.noise_start();
                for (std::size_t i = 0; i < num_refs; ++i) {
                    if (mask.ref_sees_patch(i, patch)) {
                        const Segment& rs = layout.ref_segment(i);
                        keys.spans.push_back({rs.start, rs.len});
                    }
                }
                break;
            }
            case SegmentKind::Ref: {
                const std::size_t ref = static_cast<std::size_t>(seg.ref_index);
                if (layout.text_len() > 0) {
                    keys.spans.push_back({0, layout.text_len()});
                }
                for (const VisibleKeys::Span& s : ref_noise_spans[ref].spans) {
                    keys.spans.push_back(s);
                }
                keys.spans.push_back({seg.start, seg.len});
                break;
            }
            }

            const double* qrow = q.row(qi);
            std::size_t nv = 0;
            double max_logit = -std::numeric_limits<double>::infinity();
            keys.for_each([&](std::size_t ki) {
                const double logit = dot(qrow, k.row(ki), d) * scale;
                buf[nv++] = logit;
                if (logit > max_logit) max_logit = logit;
            });
            if (nv == 0) {
                throw Error(ErrorKind::AllMaskedRow,
                            "query row " + std::to_string(qi) + " has no visible key");
            }

            double sum = 0.0;
            for (std::size_t j = 0; j < nv; ++j) {
                buf[j] = std::exp(buf[j] - max_logit);
                sum += buf[j];
            }
            const double inv = 1.0 / sum;

            double* orow = out.row(qi);
            std::size_t idx = 0;
            keys.for_each([&](std::size_t ki) {
                const double w = buf[idx++] * inv;
                const double* vrow = v.row(ki);
                for (std::size_t j = 0; j < d; ++j) {
                    orow[j] += w * vrow[j];
                }
            });
        }
    }
    return out;
}

DoubleStreamParams DoubleStreamParams::seeded(std::uint64_t seed, int width, int num_heads) {
    if (width < 4 || num_heads < 1 || width % num_heads != 0) {
        throw Error(ErrorKind::BadDimension, "width must be a positive multiple of num_heads");
    }
    DoubleStreamParams p;
    p.attn = AttentionConfig{width / num_heads, num_heads};
    p.attn.validate();
    p.hidden = 4 * width;

    SplitMix64 rng(seed);
    auto fill = [&rng](Matrix& m, std::size_t rows, std::size_t cols) {
        m = Matrix(rows, cols);
        const double scale = 1.0 / std::sqrt(static_cast<double>(rows));
        for (double& x : m.data) {
            x = rng.normal() * scale;
        }
    };
    const std::size_t w = static_cast<std::size_t>(width);
    const std::size_t h = static_cast<std::size_t>(p.hidden);
    fill(p.w_q, w, w);
    fill(p.w_k, w, w);
    fill(p.w_v, w, w);
    fill(p.w_o, w, w);
    fill(p.w_mlp1, w, h);
    fill(p.w_mlp2, h, w);
    return p;
}

DoubleStreamParams DoubleStreamParams::zeros(int width, int num_heads) {
    DoubleStreamParams p;
    p.attn = AttentionConfig{width / num_heads, num_heads};
    p.attn.validate();
    p.hidden = 4 * width;
    const std::size_t w = static_cast<std::size_t>(width);
    const std::size_t h = static_cast<std::size_t>(p.hidden);
    p.w_q = Matrix(w, w);
    p.w_k = Matrix(w, w);
    p.w_v = Matrix(w, w);
    p.w_o = Matrix(w, w);
    p.w_mlp1 = Matrix(w, h);
    p.w_mlp2 = Matrix(h, w);
    return p;
}

namespace {

double gelu(double x) { return 0.5 * x * (1.0 + std::erf(x / std::sqrt(2.0))); }

} // namespace

TokenTensor double_stream_forward(const TokenTensor& tokens, const HorizonMask& mask,
                                  const PositionIds& ids, const DoubleStreamParams& params,
                                  AttentionPath path) {
    const Matrix& x = tokens.values;
    const std::size_t len = x.rows;
    const std::size_t width = static_cast<std::size_t>(params.attn.width());
    if (x.cols != width) {
        throw Error(ErrorKind::ShapeMismatch, "token width must equal num_heads * head_dim");
    }
    if (len != mask.total_len() || ids.size() != len) {
        throw Error(ErrorKind::ShapeMismatch, "tokens, mask and ids must agree on sequence length");
    }

    const Matrix q_all = matmul(x, params.w_q);
    const Matrix k_all = matmul(x, params.w_k);
    const Matrix v_all = matmul(x, params.w_v);

    const std::size_t d = static_cast<std::size_t>(params.attn.head_dim);
    Matrix attn_out(len, width);
    for (int h = 0; h < params.attn.num_heads; ++h) {
        const std::size_t col0 = static_cast<std::size_t>(h) * d;
        Matrix qh = apply_rotary(slice_columns(q_all, col0, d), ids, params.rotary_base);
        Matrix kh = apply_rotary(slice_columns(k_all, col0, d), ids, params.rotary_base);
        Matrix vh = slice_columns(v_all, col0, d);
        Matrix oh = path == AttentionPath::Dense
                        ? masked_attention_dense(qh, kh, vh, mask, params.attn)
                        : masked_attention_block_sparse(qh, kh, vh, mask, params.attn);
        paste_columns(attn_out, oh, col0);
    }

    const Matrix projected = matmul(attn_out, params.w_o);
    Matrix x1(len, width);
    for (std::size_t i = 0; i < x1.data.size(); ++i) {
        x1.data[i] = x.data[i] + projected.data[i];
    }

    Matrix hidden = matmul(x1, params.w_mlp1);
    for (double& hval : hidden.data) {
        hval = gelu(hval);
    }
    const Matrix mlp_out = matmul(hidden, params.w_mlp2);

    TokenTensor result;
    result.layout = tokens.layout;
    result.values = Matrix(len, width);
    for (std::size_t i = 0; i < result.values.data.size(); ++i) {
        result.values.data[i] = x1.data[i] + mlp_out.data[i];
    }
    return result;
}

TokenTensor double_stream_forward(const TokenTensor& tokens, const HorizonMask& mask,
                                  const PositionIds& ids, std::uint64_t params_seed,
                                  AttentionPath path) {
    const int width = static_cast<int>(tokens.values.cols);
    return double_stream_forward(tokens, mask, ids,
                                 DoubleStreamParams::seeded(params_seed, width, kDefaultNumHeads),
                                 path);
}

TokenTensor synth_tokens(const SceneSpec& spec, int width) {
    spec.validate();
    if (width < 1) {
        throw Error(ErrorKind::BadDimension, "width must be positive");
    }
    const std::size_t len = spec.total_tokens();
    TokenTensor t;
    t.layout = build_layout(spec);
    t.values = Matrix(len, static_cast<std::size_t>(width));
    SplitMix64 rng(spec.seed);
    for (double& x : t.values.data) {
        x = rng.normal();
    }
    return t;
}

} // namespace horizon
