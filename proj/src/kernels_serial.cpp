#include <cmath>
#include <vector>

#include "sikv/detail/group_quant.hpp"
#include "sikv/kernels.hpp"

namespace sikv::kernels::serial {

void encode_sign_codes(std::span<const float> keys, std::size_t tokens, std::size_t dim,
                       std::span<std::uint8_t> packed) {
    const std::size_t groups = dim / 4;
    const std::size_t row_bytes = sign_row_bytes(groups);
    for (std::size_t i = 0; i < tokens; ++i) {
        const float* key = keys.data() + i * dim;
        std::uint8_t* row = packed.data() + i * row_bytes;
        for (std::size_t b = 0; b < row_bytes; ++b) row[b] = 0;
        for (std::size_t g = 0; g < groups; ++g) {
            const std::uint8_t code = sign_code_of(key + 4 * g);
            row[g >> 1] |= static_cast<std::uint8_t>((g & 1) ? code << 4 : code);
        }
    }
}

void accumulate_centroids(std::span<const float> keys, std::size_t tokens, std::size_t dim,
                          std::span<const std::uint8_t> packed, std::span<double> sums,
                          std::span<std::uint64_t> counts, OpCounts* ops) {
    const std::size_t groups = dim / 4;
    const std::size_t row_bytes = sign_row_bytes(groups);
    std::uint64_t reads = 0;
    for (std::size_t i = 0; i < tokens; ++i) {
        const float* key = keys.data() + i * dim;
        const std::uint8_t* row = packed.data() + i * row_bytes;
        for (std::size_t g = 0; g < groups; ++g, ++reads) {
            const std::size_t cluster = g * 16 + sign_code_at(row, g);
            double* sum = sums.data() + cluster * 4;
            const float* sub = key + 4 * g;
            sum[0] += sub[0];
            sum[1] += sub[1];
            sum[2] += sub[2];
            sum[3] += sub[3];
            ++counts[cluster];
        }
    }
    if (ops) ops->subvector_reads += reads;
}

void lut_scores(std::span<const float> table, std::size_t groups,
                std::span<const std::uint8_t> packed, std::size_t tokens, std::span<float> out,
                OpCounts* ops) {
    const std::size_t row_bytes = sign_row_bytes(groups);
    std::uint64_t lookups = 0;
    std::uint64_t adds = 0;
    for (std::size_t i = 0; i < tokens; ++i) {
        const std::uint8_t* row = packed.data() + i * row_bytes;
        float acc = table[sign_code_at(row, 0)];
        for (std::size_t g = 1; g < groups; ++g) {
            acc += table[g * 16 + sign_code_at(row, g)];
        }
        out[i] = acc;
        if (ops) {
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
    for (std::size_t i = 0; i < tokens; ++i) {
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
    bool ok = true;
    for (std::size_t i = 0; i < rows; ++i) {
        ok = detail::quantize_row(src.data() + i * cols, cols, group_size, bits,
                                  packed.data() + i * row_bytes, scales.data() + i * row_groups,
                                  zeros.data() + i * row_groups) &&
             ok;
    }
    return ok;
}

void attention_mass(std::span<const float> window, std::size_t window_rows,
                    std::span<const float> keys, std::size_t tokens, std::size_t dim,
                    std::span<double> mass) {
    const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(dim));
    std::vector<double> logits(tokens);
    for (std::size_t w = 0; w < window_rows; ++w) {
        const float* q = window.data() + w * dim;
        double max_logit = -INFINITY;
        for (std::size_t i = 0; i < tokens; ++i) {
            const float* key = keys.data() + i * dim;
            double acc = 0.0;
            for (std::size_t j = 0; j < dim; ++j) acc += static_cast<double>(q[j]) * key[j];
            logits[i] = acc * inv_sqrt_d;
            max_logit = std::fmax(max_logit, logits[i]);
        }
        double denom = 0.0;
        for (std::size_t i = 0; i < tokens; ++i) {
            logits[i] = std::exp(logits[i] - max_logit);
            denom += logits[i];
        }
        for (std::size_t i = 0; i < tokens; ++i) mass[i] += logits[i] / denom;
    }
}

}  // namespace sikv::kernels::serial
