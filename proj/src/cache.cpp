#include "sikv/cache.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "sikv/kernels.hpp"

namespace sikv {

std::vector<std::size_t> SelfIndexingCache::recent_positions() const {
    std::vector<std::size_t> positions(recent_count());
    for (std::size_t r = 0; r < positions.size(); ++r) positions[r] = prefill_length() + r;
    return positions;
}

void SelfIndexingCache::append_token(std::span<const float> key, std::span<const float> value) {
    if (key.size() != dim() || value.size() != dim()) {
        throw DimensionError("append_token: expected key and value of width " + std::to_string(dim()) +
                             ", got " + std::to_string(key.size()) + " and " +
                             std::to_string(value.size()));
    }
    require_finite(key, "append_token key");
    require_finite(value, "append_token value");
    for (std::size_t j = 0; j < dim(); ++j) recent_keys_.push_back(key[j] - norm_.mu[j]);
    recent_values_.insert(recent_values_.end(), value.begin(), value.end());
}

void SelfIndexingCache::check_position(std::size_t position, std::span<float> out) const {
    if (position >= length()) {
        throw ValidationError("position " + std::to_string(position) + " out of range for cache of " +
                              std::to_string(length()) + " tokens");
    }
    if (out.size() != dim()) {
        throw DimensionError("output row has " + std::to_string(out.size()) + " elements, expected " +
                             std::to_string(dim()));
    }
}

void SelfIndexingCache::key_row(std::size_t position, std::span<float> out, OpCounts* ops) const {
    check_position(position, out);
    const std::size_t d = dim();
    if (position >= prefill_length()) {
        const auto src = std::span<const float>(recent_keys_).subspan((position - prefill_length()) * d, d);
        std::copy(src.begin(), src.end(), out.begin());
        if (ops) ++ops->full_precision_rows;
        return;
    }
    if (is_sink(position)) {
        const auto src = sink_keys_.row(static_cast<std::size_t>(sink_slot_[position]));
        std::copy(src.begin(), src.end(), out.begin());
        if (ops) ++ops->full_precision_rows;
        return;
    }
    if (config_.key_encoding == KeyEncoding::sign_magnitude) {
        dequantize_key_row(key_payload_, norm_.alpha, codes_, position, out);
    } else {
        dequantize_value_row(key_payload_, position, out);
    }
    if (ops) ++ops->dequantized_rows;
}

void SelfIndexingCache::value_row(std::size_t position, std::span<float> out, OpCounts* ops) const {
    check_position(position, out);
    const std::size_t d = dim();
    if (position >= prefill_length()) {
        const auto src =
            std::span<const float>(recent_values_).subspan((position - prefill_length()) * d, d);
        std::copy(src.begin(), src.end(), out.begin());
        if (ops) ++ops->full_precision_rows;
        return;
    }
    if (is_sink(position)) {
        const auto src = sink_values_.row(static_cast<std::size_t>(sink_slot_[position]));
        std::copy(src.begin(), src.end(), out.begin());
        if (ops) ++ops->full_precision_rows;
        return;
    }
    dequantize_value_row(values_, position, out);
    if (ops) ++ops->dequantized_rows;
}

SelfIndexingCache assemble_cache(CacheConfig config, NormalizationState norm, SignCodeMatrix codes,
                                 Codebook codebook, QuantizedTensor key_payload,
                                 QuantizedTensor values, std::vector<std::size_t> sink_positions,
                                 Matrix sink_keys, Matrix sink_values) {
    const std::size_t tokens = codes.tokens();
    const std::size_t dim = norm.dim();
    const bool consistent = norm.alpha.size() == dim && codes.dim() == dim &&
                            codebook.dim() == dim && key_payload.rows() == tokens &&
                            key_payload.cols() == dim && values.rows() == tokens &&
                            values.cols() == dim && sink_keys.rows() == sink_positions.size() &&
                            sink_values.rows() == sink_positions.size() &&
                            (sink_positions.empty() || (sink_keys.cols() == dim && sink_values.cols() == dim));
    if (!consistent) throw DimensionError("assemble_cache: component shapes disagree");
    if (!std::is_sorted(sink_positions.begin(), sink_positions.end()) ||
        std::adjacent_find(sink_positions.begin(), sink_positions.end()) != sink_positions.end() ||
        (!sink_positions.empty() && sink_positions.back() >= tokens)) {
        throw ValidationError("assemble_cache: sink positions must be unique, ascending and < " +
                              std::to_string(tokens));
    }

    SelfIndexingCache cache;
    cache.config_ = config;
    cache.norm_ = std::move(norm);
    cache.codes_ = std::move(codes);
    cache.codebook_ = std::move(codebook);
    cache.key_payload_ = std::move(key_payload);
    cache.values_ = std::move(values);
    cache.sink_slot_.assign(tokens, -1);
    for (std::size_t s = 0; s < sink_positions.size(); ++s) {
        cache.sink_slot_[sink_positions[s]] = static_cast<std::int32_t>(s);
    }
    cache.sink_positions_ = std::move(sink_positions);
    cache.sink_keys_ = std::move(sink_keys);
    cache.sink_values_ = std::move(sink_values);
    return cache;
}

std::vector<std::size_t> select_sink_tokens(const Matrix& normalized_keys, const Matrix& window,
                                            std::size_t count, std::size_t pool_width) {
    const std::size_t tokens = normalized_keys.rows();
    if (count == 0) return {};
    if (window.rows() == 0) {
        throw ValidationError("select_sink_tokens: an observation window of at least one query is required");
    }
    if (window.cols() != normalized_keys.cols()) {
        throw DimensionError("select_sink_tokens: window width " + std::to_string(window.cols()) +
                             " does not match key width " + std::to_string(normalized_keys.cols()));
    }
    if (count >= tokens) {
        std::vector<std::size_t> all(tokens);
        for (std::size_t i = 0; i < tokens; ++i) all[i] = i;
        return all;
    }

    std::vector<double> mass(tokens, 0.0);
    kernels::omp::attention_mass(window.flat(), window.rows(), normalized_keys.flat(), tokens,
                                 normalized_keys.cols(), mass);

    const std::size_t half_width = pool_width / 2;
    std::vector<double> pooled(tokens);
    for (std::size_t i = 0; i < tokens; ++i) {
        const std::size_t lo = i >= half_width ? i - half_width : 0;
        const std::size_t hi = std::min(tokens - 1, i + half_width);
        pooled[i] = *std::max_element(mass.begin() + static_cast<std::ptrdiff_t>(lo),
                                      mass.begin() + static_cast<std::ptrdiff_t>(hi) + 1);
    }

    std::vector<std::size_t> order(tokens);
    for (std::size_t i = 0; i < tokens; ++i) order[i] = i;
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(count), order.end(),
                      [&](std::size_t a, std::size_t b) {
                          if (pooled[a] != pooled[b]) return pooled[a] > pooled[b];
                          // pooling makes a peak's neighbours tie with it; the peak itself goes first
                          if (mass[a] != mass[b]) return mass[a] > mass[b];
                          return a < b;
                      });
    order.resize(count);
    std::sort(order.begin(), order.end());
    return order;
}

namespace {

SelfIndexingCache run_prefill(const Matrix& keys, const Matrix& values, const Matrix* window,
                              const CacheConfig& config) {
    if (keys.rows() != values.rows() || keys.cols() != values.cols()) {
        throw DimensionError("prefill: keys " + shape_string(keys.rows(), keys.cols()) +
                             " and values " + shape_string(values.rows(), values.cols()) + " differ");
    }
    if (keys.cols() % kSubvectorDim != 0) {
        throw DimensionError("prefill: dimension " + std::to_string(keys.cols()) +
                             " is not a multiple of 4");
    }
    config.quant.validate(keys.cols());

    NormalizationState norm = compute_channel_stats(keys);
    const Matrix normalized = apply_normalization(keys, norm);
    SignCodeMatrix codes = encode_keys(normalized);
    Codebook codebook = build_codebook(normalized, codes);
    QuantizedTensor key_payload = config.key_encoding == KeyEncoding::sign_magnitude
                                      ? quantize_key_magnitudes(normalized, norm.alpha, config.quant)
                                      : quantize_values(normalized, config.quant);
    QuantizedTensor value_payload = quantize_values(values, config.quant);

    std::vector<std::size_t> sinks;
    if (window != nullptr) {
        sinks = select_sink_tokens(normalized, *window, config.sink_count, config.pool_width);
    } else {
        const std::size_t n = std::min(config.sink_count, keys.rows());
        sinks.resize(n);
        for (std::size_t i = 0; i < n; ++i) sinks[i] = i;
    }

    Matrix sink_keys(sinks.size(), keys.cols());
    Matrix sink_values(sinks.size(), keys.cols());
    for (std::size_t s = 0; s < sinks.size(); ++s) {
        std::ranges::copy(normalized.row(sinks[s]), sink_keys.row(s).begin());
        std::ranges::copy(values.row(sinks[s]), sink_values.row(s).begin());
    }
    return assemble_cache(config, std::move(norm), std::move(codes), std::move(codebook),
                          std::move(key_payload), std::move(value_payload), std::move(sinks),
                          std::move(sink_keys), std::move(sink_values));
}

}  // namespace

SelfIndexingCache prefill(const Matrix& keys, const Matrix& values, const CacheConfig& config) {
    return run_prefill(keys, values, nullptr, config);
}

SelfIndexingCache prefill(const Matrix& keys, const Matrix& values, const Matrix& window,
                          const CacheConfig& config) {
    return run_prefill(keys, values, &window, config);
}

TokenSelection retrieve(const SelfIndexingCache& cache, std::span<const float> query, std::size_t k,
                        LutMode mode, OpCounts* ops) {
    const LookupTable lut = mode == LutMode::centroid
                                ? build_lut(query, cache.codebook())
                                : build_sign_lut(query, cache.codes().groups());
    std::vector<float> scores = score_tokens(lut, cache.codes(), ops);
    // Decode tokens are forced in; their score slots are never compared.
    scores.resize(cache.length(), -std::numeric_limits<float>::infinity());
    const auto recent = cache.recent_positions();
    return top_k_select(scores, k, cache.sink_positions(), recent);
}

MemoryReport memory_report(std::size_t tokens, std::size_t dim, const CacheConfig& config,
                           std::size_t sinks, std::size_t recent) {
    config.quant.validate(dim);
    const std::uint64_t L = tokens;
    const std::uint64_t D = dim;
    const std::uint64_t groups = D / kSubvectorDim;
    const std::uint64_t B = static_cast<std::uint64_t>(config.quant.bits);

    MemoryReport r;
    r.tokens = L;
    r.sign_bits = L * ((groups + 1) / 2) * 8;
    r.payload_bits = 2 * B * L * D;
    r.param_bits = config.quant.pass_through()
                       ? 0
                       : 2 * (D / config.quant.group_size) * L * 2 * QuantConfig::kParamBits;
    const std::uint64_t codebook_bits = groups * kCodebookSize * kSubvectorDim * kWorkingPrecisionBits;
    const std::uint64_t norm_bits = 2 * D * kWorkingPrecisionBits;
    const std::uint64_t sink_bits = sinks * (2 * D + 1) * kWorkingPrecisionBits;
    r.fixed_bits = codebook_bits + norm_bits + sink_bits;
    r.recent_bits = static_cast<std::uint64_t>(recent) * 2 * D * kWorkingPrecisionBits;
    r.total_bits = r.variable_bits() + r.fixed_bits + r.recent_bits;
    r.baseline_bits = 2 * L * D * 16;
    r.savings_fraction =
        r.baseline_bits == 0
            ? 0.0
            : 1.0 - static_cast<double>(r.variable_bits()) / static_cast<double>(r.baseline_bits);
    return r;
}

MemoryReport memory_report(const SelfIndexingCache& cache) {
    return memory_report(cache.prefill_length(), cache.dim(), cache.config(),
                         cache.sink_positions().size(), cache.recent_count());
}

}  // namespace sikv
