#include "sikv/retrieval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "sikv/kernels.hpp"

namespace sikv {

namespace {

void require_query(std::span<const float> query, std::size_t dim, const char* what) {
    if (query.size() != dim) {
        throw DimensionError(std::string(what) + ": query has " + std::to_string(query.size()) +
                             " elements, expected " + std::to_string(dim));
    }
}

}  // namespace

LookupTable build_lut(std::span<const float> query, const Codebook& codebook) {
    require_query(query, codebook.dim(), "build_lut");
    LookupTable lut(codebook.groups());
    for (std::size_t g = 0; g < codebook.groups(); ++g) {
        const float* q = query.data() + g * kSubvectorDim;
        for (std::size_t j = 0; j < kCodebookSize; ++j) {
            const auto c = codebook.centroid(g, j);
            double acc = 0.0;
            for (std::size_t e = 0; e < kSubvectorDim; ++e) acc += static_cast<double>(q[e]) * c[e];
            lut.at(g, j) = static_cast<float>(acc);
        }
    }
    return lut;
}

LookupTable build_sign_lut(std::span<const float> query, std::size_t groups) {
    require_query(query, groups * kSubvectorDim, "build_sign_lut");
    LookupTable lut(groups);
    for (std::size_t g = 0; g < groups; ++g) {
        const float* q = query.data() + g * kSubvectorDim;
        for (std::size_t j = 0; j < kCodebookSize; ++j) {
            const auto pattern = sign_pattern(static_cast<std::uint8_t>(j));
            double acc = 0.0;
            for (std::size_t e = 0; e < kSubvectorDim; ++e) acc += static_cast<double>(q[e]) * pattern[e];
            lut.at(g, j) = static_cast<float>(acc);
        }
    }
    return lut;
}

std::vector<float> score_tokens(const LookupTable& lut, const SignCodeMatrix& codes, OpCounts* ops) {
    if (lut.groups() != codes.groups()) {
        throw DimensionError("score_tokens: table has " + std::to_string(lut.groups()) +
                             " groups, codes have " + std::to_string(codes.groups()));
    }
    std::vector<float> scores(codes.tokens());
    if (codes.groups() == 0) return scores;
    kernels::omp::lut_scores(lut.data(), codes.groups(), codes.packed(), codes.tokens(), scores, ops);
    return scores;
}

std::vector<float> dense_scores(std::span<const float> query, const Matrix& keys, OpCounts* ops) {
    require_query(query, keys.cols(), "dense_scores");
    std::vector<float> scores(keys.rows());
    kernels::omp::dense_scores(query, keys.flat(), keys.rows(), keys.cols(), scores, ops);
    return scores;
}

TokenSelection top_k_select(std::span<const float> scores, std::size_t k,
                            std::span<const std::size_t> sink,
                            std::span<const std::size_t> recent) {
    const std::size_t length = scores.size();
    std::vector<std::uint8_t> forced(length, 0);  // 1 = sink, 2 = recent
    TokenSelection sel;
    for (std::size_t idx : sink) {
        if (idx >= length) {
            throw ValidationError("top_k_select: sink index " + std::to_string(idx) +
                                  " out of range for " + std::to_string(length) + " tokens");
        }
        if (!forced[idx]) ++sel.breakdown.sink;
        forced[idx] = 1;
    }
    for (std::size_t idx : recent) {
        if (idx >= length) {
            throw ValidationError("top_k_select: recent index " + std::to_string(idx) +
                                  " out of range for " + std::to_string(length) + " tokens");
        }
        if (!forced[idx]) {
            ++sel.breakdown.recent;
            forced[idx] = 2;
        }
    }

    std::vector<std::size_t> candidates;
    candidates.reserve(length);
    for (std::size_t i = 0; i < length; ++i) {
        if (!forced[i]) candidates.push_back(i);
    }
    const std::size_t take = std::min(k, candidates.size());
    const auto better = [&](std::size_t a, std::size_t b) {
        if (scores[a] != scores[b]) return scores[a] > scores[b];
        return a < b;
    };
    std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(take),
                      candidates.end(), better);
    candidates.resize(take);
    sel.breakdown.dynamic = take;

    sel.indices = std::move(candidates);
    for (std::size_t i = 0; i < length; ++i) {
        if (forced[i]) sel.indices.push_back(i);
    }
    std::sort(sel.indices.begin(), sel.indices.end());
    return sel;
}

std::size_t TokenBudget::dynamic_k(std::size_t length, std::size_t forced) const {
    if (const auto* n = std::get_if<std::size_t>(&value)) {
        return *n > forced ? *n - forced : 0;
    }
    const std::size_t total_tokens = total(length);
    return std::max<std::size_t>(1, total_tokens > forced ? total_tokens - forced : 0);
}

std::size_t TokenBudget::total(std::size_t length) const {
    if (const auto* n = std::get_if<std::size_t>(&value)) return *n;
    const double f = std::get<double>(value);
    if (!(f >= 0.0 && f <= 1.0)) throw ValidationError("sparsity fraction must lie in [0, 1]");
    return static_cast<std::size_t>(std::llround(f * static_cast<double>(length)));
}

}  // namespace sikv
