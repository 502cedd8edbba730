#include "sikv/attention.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace sikv {

std::vector<double> stable_softmax(std::span<const double> logits) {
    std::vector<double> w(logits.size());
    if (logits.empty()) return w;
    const double max_logit = *std::max_element(logits.begin(), logits.end());
    double denom = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) {
        w[i] = std::exp(logits[i] - max_logit);
        denom += w[i];
    }
    for (double& x : w) x /= denom;
    return w;
}

namespace {

double dot(std::span<const float> a, std::span<const float> b) {
    double acc = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) acc += static_cast<double>(a[j]) * b[j];
    return acc;
}

AttentionOutput weighted_sum(const std::vector<double>& weights, std::size_t dim,
                             const auto& value_of) {
    std::vector<double> acc(dim, 0.0);
    for (std::size_t i = 0; i < weights.size(); ++i) {
        const std::span<const float> v = value_of(i);
        for (std::size_t j = 0; j < dim; ++j) acc[j] += weights[i] * v[j];
    }
    AttentionOutput result;
    result.out.resize(dim);
    for (std::size_t j = 0; j < dim; ++j) result.out[j] = static_cast<float>(acc[j]);
    result.weights_checksum = std::accumulate(weights.begin(), weights.end(), 0.0);
    return result;
}

}  // namespace

AttentionOutput exact_attention(std::span<const float> query, const Matrix& keys,
                                const Matrix& values) {
    if (keys.rows() == 0) throw ValidationError("exact_attention: empty key cache");
    if (keys.rows() != values.rows() || query.size() != keys.cols()) {
        throw DimensionError("exact_attention: query " + std::to_string(query.size()) + ", keys " +
                             shape_string(keys.rows(), keys.cols()) + ", values " +
                             shape_string(values.rows(), values.cols()));
    }
    const double scale = 1.0 / std::sqrt(static_cast<double>(keys.cols()));
    std::vector<double> logits(keys.rows());
    for (std::size_t i = 0; i < keys.rows(); ++i) logits[i] = dot(query, keys.row(i)) * scale;
    const auto weights = stable_softmax(logits);
    return weighted_sum(weights, values.cols(), [&](std::size_t i) { return values.row(i); });
}

AttentionOutput sparse_attention(std::span<const float> query, const TokenSelection& selection,
                                 const SelfIndexingCache& cache, OpCounts* ops) {
    if (selection.indices.empty()) throw ValidationError("sparse_attention: empty selection");
    const std::size_t dim = cache.dim();
    if (query.size() != dim) {
        throw DimensionError("sparse_attention: query has " + std::to_string(query.size()) +
                             " elements, cache width is " + std::to_string(dim));
    }
    const std::size_t n = selection.indices.size();
    Matrix keys(n, dim);
    Matrix values(n, dim);
    for (std::size_t s = 0; s < n; ++s) {
        cache.key_row(selection.indices[s], keys.row(s), ops);
        cache.value_row(selection.indices[s], values.row(s), ops);
    }
    const double scale = 1.0 / std::sqrt(static_cast<double>(dim));
    std::vector<double> logits(n);
    for (std::size_t s = 0; s < n; ++s) logits[s] = dot(query, keys.row(s)) * scale;
    const auto weights = stable_softmax(logits);
    return weighted_sum(weights, dim, [&](std::size_t s) { return values.row(s); });
}

ErrorReport output_error(std::span<const float> a, std::span<const float> b) {
    if (a.size() != b.size()) {
        throw DimensionError("output_error: lengths " + std::to_string(a.size()) + " and " +
                             std::to_string(b.size()) + " differ");
    }
    double ab = 0.0, aa = 0.0, bb = 0.0, diff = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) {
        const double x = a[j];
        const double y = b[j];
        ab += x * y;
        aa += x * x;
        bb += y * y;
        diff += (x - y) * (x - y);
    }
    ErrorReport r;
    if (aa == 0.0 && bb == 0.0) {
        r.cosine_sim = 1.0;
    } else if (aa == 0.0 || bb == 0.0) {
        r.cosine_sim = 0.0;
    } else {
        r.cosine_sim = std::clamp(ab / std::sqrt(aa * bb), -1.0, 1.0);
    }
    if (bb == 0.0) {
        r.rel_l2 = diff == 0.0 ? 0.0 : INFINITY;
    } else {
        r.rel_l2 = std::sqrt(diff / bb);
    }
    return r;
}

ErrorReport output_error(const AttentionOutput& a, const AttentionOutput& b) {
    return output_error(std::span<const float>(a.out), std::span<const float>(b.out));
}

}  // namespace sikv
