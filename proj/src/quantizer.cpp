#include "sikv/quantizer.hpp"

#include <cmath>

#include "sikv/detail/group_quant.hpp"
#include "sikv/half.hpp"
#include "sikv/kernels.hpp"

namespace sikv {

namespace {

bool is_code_width(int bits) { return bits == 1 || bits == 2 || bits == 4 || bits == 8; }

void require_row(const QuantizedTensor& q, std::size_t row, std::span<float> out) {
    if (row >= q.rows()) {
        throw ValidationError("row " + std::to_string(row) + " out of range for " +
                              std::to_string(q.rows()) + " rows");
    }
    if (out.size() != q.cols()) {
        throw DimensionError("output row has " + std::to_string(out.size()) + " elements, expected " +
                             std::to_string(q.cols()));
    }
}

QuantizedTensor quantize_matrix(const Matrix& src, const QuantConfig& config, const char* what) {
    config.validate(src.cols());
    require_finite(src.flat(), what);
    QuantizedTensor q(src.rows(), src.cols(), config);
    if (config.pass_through()) {
        std::copy(src.flat().begin(), src.flat().end(), q.raw_mut().begin());
        return q;
    }
    const bool ok = kernels::omp::quantize_rows(src.flat(), src.rows(), src.cols(),
                                                config.group_size, config.bits, q.packed_mut(),
                                                q.scale_bits_mut(), q.zero_bits_mut());
    if (!ok) {
        throw ValidationError(std::string(what) +
                              ": group range exceeds binary16 scale/zero-point range");
    }
    return q;
}

}  // namespace

void QuantConfig::validate(std::size_t dim) const {
    if (!is_code_width(bits) && !pass_through()) {
        throw ValidationError("unsupported quantization width " + std::to_string(bits) +
                              " (expected 1, 2, 4, 8 or 16)");
    }
    if (group_size == 0 || dim % group_size != 0) {
        throw DimensionError("group size " + std::to_string(group_size) +
                             " does not divide dimension " + std::to_string(dim));
    }
}

QuantizedTensor::QuantizedTensor(std::size_t rows, std::size_t cols, QuantConfig config)
    : rows_(rows), cols_(cols), config_(config) {
    if (config_.pass_through()) {
        raw_.assign(rows * cols, 0.0f);
    } else {
        packed_.assign(rows * row_bytes(), 0);
        scales_.assign(rows * groups_per_row(), 0);
        zeros_.assign(rows * groups_per_row(), 0);
    }
}

std::size_t QuantizedTensor::row_bytes() const noexcept {
    return config_.pass_through() ? 0 : (cols_ * static_cast<std::size_t>(config_.bits) + 7) / 8;
}

std::uint32_t QuantizedTensor::code(std::size_t row, std::size_t col) const noexcept {
    return detail::get_code(packed_.data() + row * row_bytes(), col, config_.bits);
}

float QuantizedTensor::scale(std::size_t row, std::size_t group) const noexcept {
    return half::to_float(scales_[row * groups_per_row() + group]);
}

float QuantizedTensor::zero(std::size_t row, std::size_t group) const noexcept {
    return half::to_float(zeros_[row * groups_per_row() + group]);
}

std::size_t QuantizedTensor::code_bits() const noexcept {
    return static_cast<std::size_t>(config_.bits) * rows_ * cols_;
}

std::size_t QuantizedTensor::param_bits() const noexcept {
    if (config_.pass_through()) return 0;
    return 2 * QuantConfig::kParamBits * rows_ * groups_per_row();
}

std::vector<std::uint8_t> pack_bits(std::span<const std::uint8_t> codes, int bits) {
    if (!is_code_width(bits)) throw ValidationError("pack_bits: unsupported width " + std::to_string(bits));
    const std::uint32_t max = detail::max_code(bits);
    std::vector<std::uint8_t> packed((codes.size() * static_cast<std::size_t>(bits) + 7) / 8, 0);
    for (std::size_t i = 0; i < codes.size(); ++i) {
        if (codes[i] > max) {
            throw ValidationError("pack_bits: code " + std::to_string(codes[i]) + " exceeds " +
                                  std::to_string(bits) + "-bit range");
        }
        detail::put_code(packed.data(), i, bits, codes[i]);
    }
    return packed;
}

std::vector<std::uint8_t> unpack_bits(std::span<const std::uint8_t> packed, std::size_t count,
                                      int bits) {
    if (!is_code_width(bits)) throw ValidationError("unpack_bits: unsupported width " + std::to_string(bits));
    if (packed.size() * 8 < count * static_cast<std::size_t>(bits)) {
        throw DimensionError("unpack_bits: " + std::to_string(packed.size()) + " bytes hold fewer than " +
                             std::to_string(count) + " codes");
    }
    std::vector<std::uint8_t> codes(count);
    for (std::size_t i = 0; i < count; ++i) {
        codes[i] = static_cast<std::uint8_t>(detail::get_code(packed.data(), i, bits));
    }
    return codes;
}

QuantizedTensor quantize_values(const Matrix& values, const QuantConfig& config) {
    return quantize_matrix(values, config, "quantize_values");
}

void dequantize_value_row(const QuantizedTensor& q, std::size_t row, std::span<float> out) {
    require_row(q, row, out);
    const std::size_t cols = q.cols();
    if (q.config().pass_through()) {
        const auto raw = q.raw().subspan(row * cols, cols);
        std::copy(raw.begin(), raw.end(), out.begin());
        return;
    }
    const std::size_t gs = q.config().group_size;
    const std::uint8_t* packed = q.packed().data() + row * q.row_bytes();
    for (std::size_t g = 0; g < q.groups_per_row(); ++g) {
        const float scale = q.scale(row, g);
        const float zero = q.zero(row, g);
        for (std::size_t j = g * gs; j < (g + 1) * gs; ++j) {
            out[j] = detail::dequantize_element(detail::get_code(packed, j, q.config().bits), scale, zero);
        }
    }
}

Matrix dequantize_values(const QuantizedTensor& q) {
    Matrix out(q.rows(), q.cols());
    for (std::size_t i = 0; i < q.rows(); ++i) dequantize_value_row(q, i, out.row(i));
    return out;
}

QuantizedTensor quantize_key_magnitudes(const Matrix& normalized_keys,
                                        std::span<const float> alpha, const QuantConfig& config) {
    if (alpha.size() != normalized_keys.cols()) {
        throw DimensionError("quantize_key_magnitudes: alpha has " + std::to_string(alpha.size()) +
                             " channels, keys have " + std::to_string(normalized_keys.cols()));
    }
    Matrix magnitudes(normalized_keys.rows(), normalized_keys.cols());
    for (std::size_t i = 0; i < normalized_keys.rows(); ++i) {
        const auto src = normalized_keys.row(i);
        auto dst = magnitudes.row(i);
        for (std::size_t j = 0; j < src.size(); ++j) {
            dst[j] = alpha[j] > 0.0f ? std::fmin(std::fabs(src[j]) / alpha[j], 1.0f) : 0.0f;
        }
    }
    return quantize_matrix(magnitudes, config, "quantize_key_magnitudes");
}

void dequantize_key_row(const QuantizedTensor& q, std::span<const float> alpha,
                        const SignCodeMatrix& signs, std::size_t row, std::span<float> out) {
    if (alpha.size() != q.cols() || signs.dim() != q.cols() || signs.tokens() != q.rows()) {
        throw DimensionError("dequantize_keys: magnitudes " + shape_string(q.rows(), q.cols()) +
                             ", alpha " + std::to_string(alpha.size()) + ", signs " +
                             shape_string(signs.tokens(), signs.dim()) + " disagree");
    }
    dequantize_value_row(q, row, out);
    for (std::size_t j = 0; j < out.size(); ++j) out[j] = signs.sign(row, j) * (alpha[j] * out[j]);
}

Matrix dequantize_keys(const QuantizedTensor& q, std::span<const float> alpha,
                       const SignCodeMatrix& signs) {
    Matrix out(q.rows(), q.cols());
    for (std::size_t i = 0; i < q.rows(); ++i) dequantize_key_row(q, alpha, signs, i, out.row(i));
    return out;
}

}  // namespace sikv
