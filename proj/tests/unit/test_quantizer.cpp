#include <gtest/gtest.h>

#include <limits>

#include "oracles.hpp"
#include "sikv/codebook.hpp"
#include "sikv/half.hpp"
#include "sikv/quantizer.hpp"

using namespace sikv;

namespace {

std::vector<std::uint32_t> codes_of(const QuantizedTensor& q, std::size_t row) {
    std::vector<std::uint32_t> out;
    for (std::size_t j = 0; j < q.cols(); ++j) out.push_back(q.code(row, j));
    return out;
}

const QuantConfig kB2G4{2, 4};

}  // namespace

TEST(QuantizeValues, GridAligned) {
    const auto q = quantize_values(Matrix::from_rows({{0, 1, 2, 3}}), kB2G4);
    EXPECT_EQ(q.scale(0, 0), 1.0f);
    EXPECT_EQ(q.zero(0, 0), 0.0f);
    EXPECT_EQ(codes_of(q, 0), (std::vector<std::uint32_t>{0, 1, 2, 3}));
    EXPECT_EQ(dequantize_values(q), Matrix::from_rows({{0, 1, 2, 3}}));
}

TEST(QuantizeValues, ConstantGroupIsDegenerate) {
    const auto q = quantize_values(Matrix::from_rows({{5, 5, 5, 5}}), kB2G4);
    EXPECT_EQ(q.scale(0, 0), 0.0f);
    EXPECT_EQ(q.zero(0, 0), 5.0f);
    EXPECT_EQ(codes_of(q, 0), (std::vector<std::uint32_t>(4, 0)));
    EXPECT_EQ(dequantize_values(q), Matrix(1, 4, 5.0f));
}

TEST(QuantizeValues, RoundsToNearestLevel) {
    const Matrix v = Matrix::from_rows({{0, 0.4f, 2.6f, 3}});
    const auto q = quantize_values(v, kB2G4);
    EXPECT_EQ(q.scale(0, 0), 1.0f);
    EXPECT_EQ(codes_of(q, 0), (std::vector<std::uint32_t>{0, 0, 3, 3}));
    const Matrix d = dequantize_values(q);
    EXPECT_EQ(d, Matrix::from_rows({{0, 0, 3, 3}}));
    float worst = 0;
    for (std::size_t j = 0; j < 4; ++j) worst = std::max(worst, std::fabs(d(0, j) - v(0, j)));
    EXPECT_FLOAT_EQ(worst, 0.4f);
    EXPECT_LE(worst, q.scale(0, 0) / 2);
}

TEST(QuantizeValues, HalfwayRoundsAwayFromZero) {
    // 0.5 and 1.5 steps above the zero point
    const auto q = quantize_values(Matrix::from_rows({{0, 0.5f, 1.5f, 3}}), kB2G4);
    EXPECT_EQ(codes_of(q, 0), (std::vector<std::uint32_t>{0, 1, 2, 3}));
}

TEST(QuantizeValues, ParametersAreStoredAsHalf) {
    const auto q = quantize_values(Matrix::from_rows({{0.1f, 0.2f, 0.3f, 0.7f}}), kB2G4);
    const float zp = q.zero(0, 0);
    const float qs = q.scale(0, 0);
    EXPECT_EQ(half::to_float(half::from_float(zp)), zp);
    EXPECT_EQ(half::to_float(half::from_float(qs)), qs);
    EXPECT_LE(zp, 0.1f);
    EXPECT_GE(static_cast<double>(zp) + 3.0 * qs, 0.7f);
}

TEST(QuantizeValues, Errors) {
    Matrix bad(1, 4);
    bad(0, 1) = std::numeric_limits<float>::quiet_NaN();
    EXPECT_THROW(quantize_values(bad, kB2G4), ValidationError);
    EXPECT_THROW(quantize_values(Matrix(1, 6), kB2G4), DimensionError);
    EXPECT_THROW(quantize_values(Matrix(1, 4), QuantConfig{3, 4}), ValidationError);
    EXPECT_THROW(quantize_values(Matrix(1, 4), QuantConfig{2, 0}), DimensionError);
    // a range no binary16 scale can span
    EXPECT_THROW(quantize_values(Matrix::from_rows({{-1e6f, 0, 0, 1e6f}}), kB2G4), ValidationError);
}

TEST(QuantizeValues, BitCosts) {
    const auto q = quantize_values(Matrix(7, 128), QuantConfig{2, 32});
    EXPECT_EQ(q.code_bits(), 256u * 7u);
    EXPECT_EQ(q.param_bits(), 128u * 7u);
}

TEST(QuantizeValues, NarrowOneBitRows) {
    const Matrix v = Matrix::from_rows({{0, 1, 0, 1}, {1, 1, 0, 0}});
    const auto q = quantize_values(v, QuantConfig{1, 4});
    EXPECT_EQ(q.row_bytes(), 1u);
    EXPECT_EQ(dequantize_values(q), v);
}

TEST(QuantizeValues, PassThroughIsLossless) {
    std::mt19937_64 rng(2);
    const Matrix v = oracle::random_matrix(rng, 9, 32, 100.0);
    const QuantConfig cfg{16, 32};
    const auto q = quantize_values(v, cfg);
    EXPECT_EQ(dequantize_values(q), v);
    EXPECT_EQ(q.param_bits(), 0u);
    EXPECT_EQ(q.code_bits(), 16u * 9u * 32u);
}

TEST(PackBits, LittleEndianLayout) {
    EXPECT_EQ(pack_bits(std::vector<std::uint8_t>{1, 2, 3, 0}, 2), (std::vector<std::uint8_t>{0x39}));
    EXPECT_EQ(pack_bits(std::vector<std::uint8_t>{1, 0, 1, 1, 0, 0, 0, 1}, 1), (std::vector<std::uint8_t>{0x8D}));
    EXPECT_EQ(pack_bits(std::vector<std::uint8_t>{0xA, 0x5}, 4), (std::vector<std::uint8_t>{0x5A}));
    EXPECT_EQ(pack_bits(std::vector<std::uint8_t>{7, 200}, 8), (std::vector<std::uint8_t>{7, 200}));
    EXPECT_EQ(pack_bits(std::vector<std::uint8_t>{1, 1, 1}, 2), (std::vector<std::uint8_t>{0x15}));
}

TEST(PackBits, Errors) {
    EXPECT_THROW(pack_bits(std::vector<std::uint8_t>{4}, 2), ValidationError);
    EXPECT_THROW(pack_bits(std::vector<std::uint8_t>{0}, 3), ValidationError);
    EXPECT_THROW(unpack_bits(std::vector<std::uint8_t>{0}, 5, 2), DimensionError);
}

TEST(KeyMagnitudes, UnitColumn) {
    const Matrix kn = Matrix::from_rows({{-1, 0.5f, 0, 0}, {1, -0.5f, 0, 0}});
    const std::vector<float> alpha{1, 0.5f, 0, 0};
    const auto q = quantize_key_magnitudes(kn, alpha, kB2G4);
    // row 0 magnitudes [1, 1, 0, 0]: range [0, 1]
    EXPECT_EQ(q.code(0, 0), 3u);
    EXPECT_EQ(q.code(1, 0), 3u);
    EXPECT_EQ(q.code(0, 1), 3u);
    // the binary16 scale is rounded up, so full magnitude lands within half a step
    const Matrix back = dequantize_keys(q, alpha, encode_keys(kn));
    for (std::size_t i = 0; i < 2; ++i) {
        for (std::size_t j = 0; j < 4; ++j) EXPECT_NEAR(back(i, j), kn(i, j), alpha[j] * q.scale(i, 0) / 2);
    }
}

TEST(KeyMagnitudes, ZeroChannelIsDegenerate) {
    const Matrix kn(3, 4);
    const auto q = quantize_key_magnitudes(kn, std::vector<float>(4, 0.0f), kB2G4);
    for (std::size_t i = 0; i < 3; ++i) {
        EXPECT_EQ(q.scale(i, 0), 0.0f);
        EXPECT_EQ(q.zero(i, 0), 0.0f);
    }
    EXPECT_EQ(dequantize_keys(q, std::vector<float>(4, 0.0f), encode_keys(kn)), kn);
}

TEST(KeyMagnitudes, ConstantAfterNormalizationReconstructsExactly) {
    const Matrix kn = Matrix::from_rows({{0.5f, -0.25f, 1.0f, -1.0f}});
    const std::vector<float> alpha{0.5f, 0.25f, 1, 1};
    const auto q = quantize_key_magnitudes(kn, alpha, kB2G4);
    EXPECT_EQ(q.scale(0, 0), 0.0f);
    EXPECT_EQ(q.zero(0, 0), 1.0f);
    EXPECT_EQ(dequantize_keys(q, alpha, encode_keys(kn)), kn);
}

TEST(KeyMagnitudes, SignFlipNegatesOneElement) {
    std::mt19937_64 rng(8);
    const Matrix kn = oracle::random_matrix(rng, 4, 32);
    std::vector<float> alpha(32, 0.0f);
    for (std::size_t i = 0; i < 4; ++i) {
        for (std::size_t j = 0; j < 32; ++j) alpha[j] = std::max(alpha[j], std::fabs(kn(i, j)));
    }
    const auto q = quantize_key_magnitudes(kn, alpha, QuantConfig{2, 32});
    SignCodeMatrix signs = encode_keys(kn);
    const Matrix before = dequantize_keys(q, alpha, signs);
    signs.flip_sign(2, 13);
    const Matrix after = dequantize_keys(q, alpha, signs);
    for (std::size_t i = 0; i < 4; ++i) {
        for (std::size_t j = 0; j < 32; ++j) {
            if (i == 2 && j == 13) {
                EXPECT_EQ(after(i, j), -before(i, j));
            } else {
                EXPECT_EQ(after(i, j), before(i, j));
            }
        }
    }
}

TEST(KeyMagnitudes, ShapeErrors) {
    EXPECT_THROW(quantize_key_magnitudes(Matrix(2, 4), std::vector<float>(3, 1.0f), kB2G4), DimensionError);
    const auto q = quantize_key_magnitudes(Matrix(2, 4), std::vector<float>(4, 1.0f), kB2G4);
    EXPECT_THROW(dequantize_keys(q, std::vector<float>(4, 1.0f), encode_keys(Matrix(3, 4))), DimensionError);
}
