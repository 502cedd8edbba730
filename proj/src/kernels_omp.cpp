#include <atomic>
#include <cmath>
#include <vector>

#include "sikv/detail/group_quant.hpp"
#include "sikv/kernels.hpp"

namespace sikv::kernels::omp {

void encode_sign_codes(std::span<const float> keys, std::size_t tokens, std::size_t dim,
                       std::span<std::uint8_t> packed) {
    const std::size_t groups = dim / 4;
    const std::size_t row_bytes = sign_row_bytes(groups);
    const auto n = static_cast<std::ptrdiff_t>(tokens);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        const float* key = keys.data() + i * dim;
        std::uint8_t* row = packed.data() + i * row_bytes;
        for (std::size_t b = 0; b < row_bytes; ++b) row[b] = 0;
        for (std::size_t g = 0; g < groups; ++g) {
            const std::uint8_t code = sign_code_of(key + 4 * g);
            row[g >> 1] |= static_cast<std::uint8_t>((g & 1) ? code << 4 : code);
        }
    }
}

// Parallel over groups so every cluster is still summed in token order.
void accumulate_centroids(std::span<const float> keys, std::size_t tokens, std::size_t dim,
                          std::span<const std::uint8_t> packed, std::span<double> sums,
                          std::span<std::uint64_t> counts, OpCounts* ops) {
    const std::size_t groups = dim / 4;
    const std::size_t row_bytes = sign_row_bytes(groups);
    const auto n_groups = static_cast<std::ptrdiff_t>(groups);
    std::uint64_t reads = 0;
#pragma omp parallel for schedule(static) reduction(+ : reads)
    for (std::ptrdiff_t g = 0; g < n_groups; ++g) {
        double* group_sums = sums.data() + g * 16 * 4;
        std::uint64_t* group_counts = counts.data() + g * 16;
        for (std::size_t i = 0; i < tokens; ++i, ++reads) {
            const std::uint8_t code = sign_code_at(packed.data() + i * row_bytes, g);
            const float* sub = keys.data() + i * dim + 4 * g;
            double* sum = group_sums + code * 4;
            sum[0] += sub[0];
            sum[1] += sub[1];
            sum[2] += sub[2];
            sum[3] += sub[3];
            ++group_counts[code];
        }
    }
    if (ops) ops->subvector_reads += reads;
}

void lut_scores(std::span<const float> table, std::size_t groups,
                std::span<const std::uint8_t> packed, std::size_t tokens, std::span<float> out,
                OpCounts* ops) {
    const std::size_t row_bytes = sign_row_bytes(groups);
    const auto n = static_cast<std::ptrdiff_t>(tokens);
    const bool counting = ops != nullptr;
    std::uint64_t lookups = 0;
    std::uint64_t adds = 0;
#pragma omp parallel for schedule(static) reduction(+ : lookups, adds)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        const std::uint8_t* row = packed.data() + i * row_bytes;
        float acc = table[sign_code_at(row, 0)];
        for (std::size_t g = 1; g < groups; ++g) {
            acc += table[g * 16 + sign_code_at(row, g)];
        }
        out[i] = acc;
        if (counting) {
            lookups += groups;
            adds += groups - 1;
        }
    }
    if (ops) {
        ops->table_lookups += lookups;
        ops->adds += adds;
    }
}

void dense_scores(std::span<const float> query, std::span<const float> keys, std::size_t tokens,
                  std::size_t dim, std::span<float> out, OpCounts* ops) {
    const auto n = static_cast<std::ptrdiff_t>(tokens);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        const float* key = keys.data() + i * dim;
        double acc = 0.0;
        for (std::size_t j = 0; j < dim; ++j) acc += static_cast<double>(query[j]) * key[j];
        out[i] = static_cast<float>(acc);
    }
    if (ops) {
        ops->multiplies += tokens * dim;
        ops->adds += tokens * dim;
    }
}

bool quantize_rows(std::span<const float> src, std::size_t rows, std::size_t cols,
                   std::size_t group_size, int bits, std::span<std::uint8_t> packed,
                   std::span<std::uint16_t> scales, std::span<std::uint16_t> zeros) {
    const std::size_t row_bytes = (cols * static_cast<std::size_t>(bits) + 7) / 8;
    const std::size_t row_groups = cols / group_size;
    const auto n = static_cast<std::ptrdiff_t>(rows);
    std::atomic<bool> ok{true};
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        if (!detail::quantize_row(src.data() + i * cols, cols, group_size, bits,
                                  packed.data() + i * row_bytes, scales.data() + i * row_groups,
                                  zeros.data() + i * row_groups)) {
            ok.store(false, std::memory_order_relaxed);
        }
    }
    return ok.load();
}

void attention_mass(std::span<const float> window, std::size_t window_rows,
                    std::span<const float> keys, std::size_t tokens, std::size_t dim,
                    std::span<double> mass) {
    const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(dim));
    const auto n = static_cast<std::ptrdiff_t>(tokens);
    std::vector<double> logits(tokens);
    for (std::size_t w = 0; w < window_rows; ++w) {
        const float* q = window.data() + w * dim;
#pragma omp parallel for schedule(static)
        for (std::ptrdiff_t i = 0; i < n; ++i) {
            const float* key = keys.data() + i * dim;
            double acc = 0.0;
            for (std::size_t j = 0; j < dim; ++j) acc += static_cast<double>(q[j]) * key[j];
            logits[i] = acc * inv_sqrt_d;
        }
        double max_logit = -INFINITY;
        for (std::size_t i = 0; i < tokens; ++i) max_logit = std::fmax(max_logit, logits[i]);
#pragma omp parallel for schedule(static)
        for (std::ptrdiff_t i = 0; i < n; ++i) logits[i] = std::exp(logits[i] - max_logit);
        double denom = 0.0;
        for (std::size_t i = 0; i < tokens; ++i) denom += logits[i];
#pragma omp parallel for schedule(static)
        for (std::ptrdiff_t i = 0; i < n; ++i) mass[i] += logits[i] / denom;
    }
}

}  // namespace sikv::kernels::omp
