#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "sikv/codebook.hpp"
#include "sikv/common.hpp"

namespace sikv {

/// Token-wise, group-wise asymmetric quantization settings.
///
/// bits is 1, 2, 4 or 8 for B-bit codes with binary16 scale and zero point per
/// group of `group_size` contiguous elements of a token. bits == 16 selects the
/// lossless pass-through used as the 16-bit reference configuration: elements
/// are kept at working precision and no parameters are stored.
struct QuantConfig {
    int bits = 2;
    std::size_t group_size = 32;

    static constexpr int kPassThroughBits = 16;
    static constexpr std::size_t kParamBits = 16;

    bool pass_through() const noexcept { return bits == kPassThroughBits; }
    /// Throws ValidationError for unsupported bit widths and DimensionError when
    /// group_size does not divide `dim`.
    void validate(std::size_t dim) const;

    bool operator==(const QuantConfig&) const = default;
};

/// rows x cols B-bit codes (little-endian bit stream per row, lowest element in
/// the least-significant bits) with per-(row, group) binary16 scale and zero.
class QuantizedTensor {
public:
    QuantizedTensor() = default;
    QuantizedTensor(std::size_t rows, std::size_t cols, QuantConfig config);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    const QuantConfig& config() const noexcept { return config_; }
    std::size_t groups_per_row() const noexcept { return cols_ / config_.group_size; }
    std::size_t row_bytes() const noexcept;

    std::uint32_t code(std::size_t row, std::size_t col) const noexcept;
    float scale(std::size_t row, std::size_t group) const noexcept;
    float zero(std::size_t row, std::size_t group) const noexcept;

    /// Storage cost: B * rows * cols for codes, 2 * 16 * rows * groups for parameters.
    std::size_t code_bits() const noexcept;
    std::size_t param_bits() const noexcept;

    std::span<const std::uint8_t> packed() const noexcept { return packed_; }
    std::span<std::uint8_t> packed_mut() noexcept { return packed_; }
    std::span<const std::uint16_t> scale_bits() const noexcept { return scales_; }
    std::span<std::uint16_t> scale_bits_mut() noexcept { return scales_; }
    std::span<const std::uint16_t> zero_bits() const noexcept { return zeros_; }
    std::span<std::uint16_t> zero_bits_mut() noexcept { return zeros_; }
    /// Pass-through payload (rows x cols floats); empty otherwise.
    std::span<const float> raw() const noexcept { return raw_; }
    std::span<float> raw_mut() noexcept { return raw_; }

    bool operator==(const QuantizedTensor&) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    QuantConfig config_;
    std::vector<std::uint8_t> packed_;
    std::vector<std::uint16_t> scales_;
    std::vector<std::uint16_t> zeros_;
    std::vector<float> raw_;
};

/// Packs B-bit codes (B in {1,2,4,8}) into a little-endian bit stream.
std::vector<std::uint8_t> pack_bits(std::span<const std::uint8_t> codes, int bits);
std::vector<std::uint8_t> unpack_bits(std::span<const std::uint8_t> packed, std::size_t count,
                                      int bits);

/// Per token, per group: qs = (max - min) / (2^B - 1), zp = min,
/// code = clamp(round((v - zp) / qs), 0, 2^B - 1).
///
/// qs and zp are narrowed to binary16 before the codes are computed: zp rounds
/// down and qs rounds up so the stored grid covers [min, max]. A constant group
/// whose value is representable stores qs = 0 and all-zero codes.
QuantizedTensor quantize_values(const Matrix& values, const QuantConfig& config);

/// qs * code + zp with the element's group parameters.
Matrix dequantize_values(const QuantizedTensor& q);
/// Reconstructs a single token row (token-wise random access).
void dequantize_value_row(const QuantizedTensor& q, std::size_t row, std::span<float> out);

/// Quantizes |K'| / alpha column-wise normalized magnitudes (entries of a
/// zero-alpha channel are 0). Every pre-quantization entry lies in [0, 1].
QuantizedTensor quantize_key_magnitudes(const Matrix& normalized_keys,
                                        std::span<const float> alpha, const QuantConfig& config);

/// sign * alpha * (qs * code + zp), signs decoded from the sign-code plane.
Matrix dequantize_keys(const QuantizedTensor& q, std::span<const float> alpha,
                       const SignCodeMatrix& signs);
void dequantize_key_row(const QuantizedTensor& q, std::span<const float> alpha,
                        const SignCodeMatrix& signs, std::size_t row, std::span<float> out);

}  // namespace sikv
