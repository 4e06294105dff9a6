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

#include "horizon/filter.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_set>

namespace horizon {

namespace {

std::vector<double> min_max_normalize(const std::vector<double>& values) {
    const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
    const double lo = *lo_it;
    const double hi = *hi_it;
    std::vector<double> out(values.size());
    if (lo == hi) {
        std::fill(out.begin(), out.end(), 0.5);
        return out;
    }
    const double inv = 1.0 / (hi - lo);
    for (std::size_t i = 0; i < values.size(); ++i) {
        out[i] = (values[i] - lo) * inv;
    }
    return out;
}

void validate_records(const std::vector<ScoreRecord>& records) {
    if (records.empty()) {
        throw Error(ErrorKind::EmptyDataset, "no score records");
    }
    std::unordered_set<std::string> seen;
    seen.reserve(records.size());
    for (const ScoreRecord& r : records) {
        if (!std::isfinite(r.clip_i) || !std::isfinite(r.dino) || !std::isfinite(r.s_vlm) ||
            !std::isfinite(r.s_ds)) {
            throw Error(ErrorKind::InvalidSpec, "non-finite score for pair " + r.pair_id);
        }
        if (!seen.insert(r.pair_id).second) {
            throw Error(ErrorKind::InvalidSpec, "duplicate pair_id " + r.pair_id);
        }
    }
}

} // namespace

std::vector<double> combine_visual(const std::vector<ScoreRecord>& records) {
    if (records.empty()) {
        throw Error(ErrorKind::EmptyDataset, "no score records");
    }
    std::vector<double> clip(records.size());
    std::vector<double> dino(records.size());
    for (std::size_t i = 0; i < records.size(); ++i) {
        clip[i] = records[i].clip_i;
        dino[i] = records[i].dino;
    }
    const std::vector<double> nclip = min_max_normalize(clip);
    const std::vector<double> ndino = min_max_normalize(dino);
    std::vector<double> out(records.size());
    for (std::size_t i = 0; i < records.size(); ++i) {
        out[i] = 0.5 * (nclip[i] + ndino[i]);
    }
    return out;
}

std::vector<double> fractional_rank(const std::vector<double>& values) {
    const std::size_t n = values.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&values](std::size_t a, std::size_t b) { return values[a] > values[b]; });

    std::vector<double> ranks(n, 0.0);
    std::size_t pos = 0;
    while (pos < n) {
        std::size_t end = pos + 1;
        while (end < n && values[order[end]] == values[order[pos]]) {
            ++end;
        }
        // positions pos+1 .. end occupy the tie group; each gets the mean
        const double rank = (static_cast<double>(pos + 1) + static_cast<double>(end)) / 2.0;
        for (std::size_t i = pos; i < end; ++i) {
            ranks[order[i]] = rank;
        }
        pos = end;
    }
    return ranks;
}

std::vector<RankedRecord> aggregate(const std::vector<ScoreRecord>& records) {
    validate_records(records);

    const std::vector<double> s_v = combine_visual(records);
    std::vector<double> s_vlm(records.size());
    std::vector<double> s_ds(records.size());
    for (std::size_t i = 0; i < records.size(); ++i) {
        s_vlm[i] = records[i].s_vlm;
        s_ds[i] = records[i].s_ds;
    }
    const std::vector<double> r_v = fractional_rank(s_v);
    const std::vector<double> r_vlm = fractional_rank(s_vlm);
    const std::vector<double> r_ds = fractional_rank(s_ds);

    std::vector<RankedRecord> out(records.size());
    for (std::size_t i = 0; i < records.size(); ++i) {
        out[i].pair_id = records[i].pair_id;
        out[i].r_v = r_v[i];
        out[i].r_vlm = r_vlm[i];
        out[i].r_ds = r_ds[i];
        out[i].rank = (r_v[i] + r_vlm[i] + r_ds[i]) / 3.0;
    }
    std::sort(out.begin(), out.end(), [](const RankedRecord& a, const RankedRecord& b) {
        if (a.rank != b.rank) return a.rank < b.rank;
        return a.pair_id < b.pair_id;
    });
    return out;
}

SelectionPolicy SelectionPolicy::parse(const std::string& text) {
    std::string name = text;
    std::string value;
    if (const std::size_t eq = text.find('='); eq != std::string::npos) {
        name = text.substr(0, eq);
        value = text.substr(eq + 1);
    }

    SelectionPolicy policy;
    if (name == "top_k") {
        policy.kind = Kind::TopK;
        policy.value = 0.0;
    } else if (name == "top_fraction") {
        policy.kind = Kind::TopFraction;
        policy.value = kDefaultKeepFraction;
    } else if (name == "rank_threshold") {
        policy.kind = Kind::RankThreshold;
        policy.value = 0.0;
    } else {
        throw Error(ErrorKind::BadPolicy, "unknown policy '" + name + "'");
    }
    if (!value.empty()) {
        try {
            std::size_t used = 0;
            policy.value = std::stod(value, &used);
            if (used != value.size()) throw std::invalid_argument(value);
        } catch (const std::exception&) {
            throw Error(ErrorKind::BadPolicy, "bad policy value '" + value + "'");
        }
    } else if (policy.kind != Kind::TopFraction) {
        throw Error(ErrorKind::BadPolicy, name + " requires a value, e.g. " + name + "=10");
    }
    return policy;
}

std::vector<std::string> select_pairs(const std::vector<RankedRecord>& ranked,
                                      const SelectionPolicy& policy) {
    std::size_t keep = 0;
    switch (policy.kind) {
    case SelectionPolicy::Kind::TopK: {
        if (policy.value < 0.0 || policy.value != std::floor(policy.value)) {
            throw Error(ErrorKind::BadPolicy, "top_k must be a non-negative integer");
        }
        keep = std::min(static_cast<std::size_t>(policy.value), ranked.size());
        break;
    }
    case SelectionPolicy::Kind::TopFraction: {
        if (policy.value < 0.0 || policy.value > 1.0) {
            throw Error(ErrorKind::BadPolicy, "top_fraction must lie in [0, 1]");
        }
        keep = static_cast<std::size_t>(
            std::floor(policy.value * static_cast<double>(ranked.size())));
        break;
    }
    case SelectionPolicy::Kind::RankThreshold: {
        if (!std::isfinite(policy.value)) {
            throw Error(ErrorKind::BadPolicy, "rank_threshold must be finite");
        }
        std::vector<std::string> kept;
        for (const RankedRecord& r : ranked) {
            if (r.rank <= policy.value) kept.push_back(r.pair_id);
        }
        return kept;
    }
    }
    std::vector<std::string> kept;
    kept.reserve(keep);
    for (std::size_t i = 0; i < keep; ++i) {
        kept.push_back(ranked[i].pair_id);
    }
    return kept;
}

} // namespace horizon
