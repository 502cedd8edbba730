#pragma once

#include <cstddef>
#include <cstdint>
#include <span>

#include "sikv/op_counts.hpp"

// Data-parallel inner loops. `serial` is the reference implementation kept for
// testing; `omp` is the OpenMP version the library dispatches to. Both produce
// bit-identical results: every reduction runs in the same element order.
//
// Layouts:
//   keys/values   row-major tokens x dim floats
//   sign codes    tokens x ceil(groups/2) bytes, group g in the low nibble when g is even
//   lookup table  groups x 16 floats
//   B-bit codes   rows x cols codes, little-endian bit stream per row
//   params        rows x (cols/group_size) binary16 bit patterns
namespace sikv::kernels {

inline std::size_t sign_row_bytes(std::size_t groups) noexcept { return (groups + 1) / 2; }

inline std::uint8_t sign_code_at(const std::uint8_t* row, std::size_t group) noexcept {
    const std::uint8_t byte = row[group >> 1];
    return (group & 1) ? static_cast<std::uint8_t>(byte >> 4) : static_cast<std::uint8_t>(byte & 0x0F);
}

/// Code(k) = sum_i [k_i >= 0] * 2^(3-i) for a 4-element subvector.
inline std::uint8_t sign_code_of(const float* sub) noexcept {
    return static_cast<std::uint8_t>(((sub[0] >= 0.0f) << 3) | ((sub[1] >= 0.0f) << 2) |
                                     ((sub[2] >= 0.0f) << 1) | (sub[3] >= 0.0f));
}

namespace serial {

void encode_sign_codes(std::span<const float> keys, std::size_t tokens, std::size_t dim,
                       std::span<std::uint8_t> packed);

/// One pass over the keys: each subvector is read once and added to the sum
/// and count of its (group, code) cluster. sums: groups x 16 x 4, counts:
/// groups x 16, both zero-initialised by the caller.
void accumulate_centroids(std::span<const float> keys, std::size_t tokens, std::size_t dim,
                          std::span<const std::uint8_t> packed, std::span<double> sums,
                          std::span<std::uint64_t> counts, OpCounts* ops);

/// score[i] = sum_g table[g][code(i, g)]. Lookups and additions only.
void lut_scores(std::span<const float> table, std::size_t groups,
                std::span<const std::uint8_t> packed, std::size_t tokens, std::span<float> out,
                OpCounts* ops);

/// score[i] = q . k_i with a double accumulator.
void dense_scores(std::span<const float> query, std::span<const float> keys, std::size_t tokens,
                  std::size_t dim, std::span<float> out, OpCounts* ops);

/// Token-wise, group-wise asymmetric quantization into a zeroed `packed`
/// buffer. Returns false if some group's parameters overflow binary16.
bool quantize_rows(std::span<const float> src, std::size_t rows, std::size_t cols,
                   std::size_t group_size, int bits, std::span<std::uint8_t> packed,
                   std::span<std::uint16_t> scales, std::span<std::uint16_t> zeros);

/// mass[i] += softmax_i(q_w . k / sqrt(dim)), summed over every window query.
void attention_mass(std::span<const float> window, std::size_t window_rows,
                    std::span<const float> keys, std::size_t tokens, std::size_t dim,
                    std::span<double> mass);

}  // namespace serial

namespace omp {

void encode_sign_codes(std::span<const float> keys, std::size_t tokens, std::size_t dim,
                       std::span<std::uint8_t> packed);
void accumulate_centroids(std::span<const float> keys, std::size_t tokens, std::size_t dim,
                          std::span<const std::uint8_t> packed, std::span<double> sums,
                          std::span<std::uint64_t> counts, OpCounts* ops);
void lut_scores(std::span<const float> table, std::size_t groups,
                std::span<const std::uint8_t> packed, std::size_t tokens, std::span<float> out,
                OpCounts* ops);
void dense_scores(std::span<const float> query, std::span<const float> keys, std::size_t tokens,
                  std::size_t dim, std::span<float> out, OpCounts* ops);
bool quantize_rows(std::span<const float> src, std::size_t rows, std::size_t cols,
                   std::size_t group_size, int bits, std::span<std::uint8_t> packed,
                   std::span<std::uint16_t> scales, std::span<std::uint16_t> zeros);
void attention_mass(std::span<const float> window, std::size_t window_rows,
                    std::span<const float> keys, std::size_t tokens, std::size_t dim,
                    std::span<double> mass);

}  // namespace omp

}  // namespace sikv::kernels
