#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>

#include "sikv/half.hpp"

// Element-level asymmetric quantization shared by the serial and OpenMP
// kernels and by the quantizer module.
namespace sikv::detail {

struct GroupParams {
    std::uint16_t scale = 0;  // binary16 bits
    std::uint16_t zero = 0;   // binary16 bits
};

inline std::uint32_t max_code(int bits) noexcept { return (1u << bits) - 1u; }

/// Fits binary16 scale/zero-point for a group spanning [lo, hi]. The zero point
/// is rounded down and the scale rounded up so the narrowed grid still covers
/// the whole range. A range collapsing onto a representable half gets scale 0.
/// Returns false when the parameters overflow binary16.
inline bool fit_group(float lo, float hi, int bits, GroupParams& out) noexcept {
    const std::uint32_t levels = max_code(bits);
    out.zero = half::round_down(lo);
    const double zero = half::to_float(out.zero);
    if (!std::isfinite(zero)) return false;
    if (zero == static_cast<double>(hi)) {
        out.scale = 0;
        return true;
    }
    const double step = (static_cast<double>(hi) - zero) / levels;
    out.scale = half::round_up(static_cast<float>(step));
    while (std::isfinite(half::to_float(out.scale)) &&
           zero + static_cast<double>(half::to_float(out.scale)) * levels < hi) {
        out.scale = half::next_up(out.scale);
    }
    return std::isfinite(half::to_float(out.scale));
}

/// clamp(round((v - zero) / scale), 0, 2^B - 1), rounding half away from zero.
inline std::uint32_t quantize_element(float v, float scale, float zero,
                                      std::uint32_t max) noexcept {
    if (scale == 0.0f) return 0;
    const double q = std::round((static_cast<double>(v) - zero) / scale);
    if (q <= 0.0) return 0;
    if (q >= max) return max;
    return static_cast<std::uint32_t>(q);
}

inline float dequantize_element(std::uint32_t code, float scale, float zero) noexcept {
    return static_cast<float>(static_cast<double>(scale) * code + static_cast<double>(zero));
}

// B-bit little-endian packing: element e occupies bits [e*B, (e+1)*B) of the
// stream, lowest element in the least-significant bits of each byte.
inline void put_code(std::uint8_t* packed, std::size_t index, int bits,
                     std::uint32_t code) noexcept {
    if (bits == 8) {
        packed[index] = static_cast<std::uint8_t>(code);
        return;
    }
    const std::size_t bit = index * static_cast<std::size_t>(bits);
    packed[bit >> 3] |= static_cast<std::uint8_t>(code << (bit & 7));
}

inline std::uint32_t get_code(const std::uint8_t* packed, std::size_t index, int bits) noexcept {
    if (bits == 8) return packed[index];
    const std::size_t bit = index * static_cast<std::size_t>(bits);
    return (packed[bit >> 3] >> (bit & 7)) & max_code(bits);
}

/// Quantizes one token row group by group. `packed_row` must be zeroed.
inline bool quantize_row(const float* src, std::size_t cols, std::size_t group_size, int bits,
                         std::uint8_t* packed_row, std::uint16_t* scales,
                         std::uint16_t* zeros) noexcept {
    const std::uint32_t max = max_code(bits);
    bool ok = true;
    for (std::size_t g = 0, begin = 0; begin < cols; ++g, begin += group_size) {
        float lo = src[begin];
        float hi = src[begin];
        for (std::size_t j = begin + 1; j < begin + group_size; ++j) {
            lo = std::fmin(lo, src[j]);
            hi = std::fmax(hi, src[j]);
        }
        GroupParams params;
        ok = fit_group(lo, hi, bits, params) && ok;
        scales[g] = params.scale;
        zeros[g] = params.zero;
        const float scale = half::to_float(params.scale);
        const float zero = half::to_float(params.zero);
        for (std::size_t j = begin; j < begin + group_size; ++j) {
            put_code(packed_row, j, bits, quantize_element(src[j], scale, zero, max));
        }
    }
    return ok;
}

}  // namespace sikv::detail
