#include <gtest/gtest.h>

#include <set>

#include "oracles.hpp"
#include "sikv/codebook.hpp"
#include "sikv/normalize.hpp"

using namespace sikv;

static_assert(kCodebookSize == 16);
static_assert(kSubvectorDim == 4);

namespace {

std::uint8_t code_of(std::array<float, 4> v) { return encode_sign_code(std::span<const float, 4>(v)); }

}  // namespace

TEST(SignCode, Examples) {
    EXPECT_EQ(code_of({1, 1, 1, 1}), 15);
    EXPECT_EQ(code_of({-1, -1, -1, -1}), 0);
    EXPECT_EQ(code_of({0.5f, -0.3f, 1.2f, -0.1f}), 10);
    EXPECT_EQ(code_of({0, 0, 0, 0}), 15);
    EXPECT_EQ(code_of({-1, -1, -1, 0}), 1);
}

TEST(SignCode, BijectiveOnStrictPatterns) {
    std::set<int> seen;
    for (int code = 0; code < 16; ++code) {
        const auto p = sign_pattern(static_cast<std::uint8_t>(code));
        for (float x : p) EXPECT_TRUE(x == 1.0f || x == -1.0f);
        EXPECT_EQ(code_of(p), code);
        seen.insert(oracle::sign_code(p.data()));
    }
    EXPECT_EQ(seen.size(), 16u);
}

TEST(EncodeKeys, TwoGroupToken) {
    const Matrix k = Matrix::from_rows({{0.5f, -0.3f, 1.2f, -0.1f, 1, 1, 1, 1}});
    EXPECT_EQ(encode_keys(k).unpack(), (std::vector<std::uint8_t>{10, 15}));
}

TEST(EncodeKeys, NegationComplementsCodes) {
    std::mt19937_64 rng(11);
    Matrix k = oracle::random_matrix(rng, 33, 12);
    Matrix neg = k;
    for (float& x : neg.flat()) x = -x;
    const auto a = encode_keys(k).unpack();
    const auto b = encode_keys(neg).unpack();
    for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(b[i], 15 - a[i]);
}

TEST(EncodeKeys, ZeroMatrixIsAllFifteen) {
    const auto codes = encode_keys(Matrix(4, 16)).unpack();
    for (auto c : codes) EXPECT_EQ(c, 15);
}

TEST(EncodeKeys, RejectsWidthNotMultipleOfFour) {
    EXPECT_THROW(encode_keys(Matrix(2, 6)), DimensionError);
}

TEST(EncodeKeys, BitCostIsLDPlusNibblePadding) {
    EXPECT_EQ(encode_keys(Matrix(10, 128)).bit_cost(), 10u * 128u);
    // three groups per row: 12 bits of codes plus a 4-bit pad
    EXPECT_EQ(encode_keys(Matrix(10, 12)).bit_cost(), 10u * 16u);
}

TEST(SignCodeMatrix, PackLayoutEvenGroupLowNibble) {
    const auto m = SignCodeMatrix::pack(1, 3, std::vector<std::uint8_t>{0x3, 0xA, 0x7});
    EXPECT_EQ(m.packed()[0], 0xA3);
    EXPECT_EQ(m.packed()[1], 0x07);
}

TEST(SignCodeMatrix, SignAndFlip) {
    SignCodeMatrix m = encode_keys(Matrix::from_rows({{0.5f, -0.3f, 1.2f, -0.1f}}));
    EXPECT_EQ(m.sign(0, 0), 1.0f);
    EXPECT_EQ(m.sign(0, 1), -1.0f);
    m.flip_sign(0, 1);
    EXPECT_EQ(m.code(0, 0), 14);
    EXPECT_THROW(m.set_code(0, 0, 16), ValidationError);
    EXPECT_THROW(SignCodeMatrix::pack(1, 2, std::vector<std::uint8_t>{1}), DimensionError);
}

TEST(BuildCodebook, SingletonCluster) {
    const Matrix k = Matrix::from_rows({{0.5f, -0.3f, 1.2f, -0.1f}});
    const Codebook cb = build_codebook(k, encode_keys(k));
    for (std::size_t j = 0; j < 16; ++j) {
        const auto c = cb.centroid(0, j);
        if (j == 10) {
            EXPECT_EQ(std::vector<float>(c.begin(), c.end()), (std::vector<float>{0.5f, -0.3f, 1.2f, -0.1f}));
            EXPECT_EQ(cb.cluster_size(0, j), 1u);
        } else {
            EXPECT_EQ(std::vector<float>(c.begin(), c.end()), std::vector<float>(4, 0.0f));
            EXPECT_EQ(cb.cluster_size(0, j), 0u);
        }
    }
}

TEST(BuildCodebook, MeanOfTwo) {
    const Matrix k = Matrix::from_rows({{1, -1, 1, -1}, {3, -3, 3, -3}});
    const Codebook cb = build_codebook(k, encode_keys(k));
    const auto c = cb.centroid(0, 10);
    EXPECT_EQ(std::vector<float>(c.begin(), c.end()), (std::vector<float>{2, -2, 2, -2}));
    const auto empty = cb.centroid(0, 7);
    EXPECT_EQ(std::vector<float>(empty.begin(), empty.end()), std::vector<float>(4, 0.0f));
}

TEST(BuildCodebook, CountsOneReadPerSubvector) {
    std::mt19937_64 rng(5);
    const Matrix k = oracle::random_matrix(rng, 300, 32);
    OpCounts ops;
    build_codebook(k, encode_keys(k), &ops);
    EXPECT_EQ(ops.subvector_reads, 300u * 8u);
    EXPECT_EQ(ops.multiplies, 0u);
}

TEST(BuildCodebook, ShapeMismatch) {
    const Matrix k(4, 8);
    EXPECT_THROW(build_codebook(k, encode_keys(Matrix(5, 8))), DimensionError);
    EXPECT_THROW(build_codebook(k, encode_keys(Matrix(4, 12))), DimensionError);
}

TEST(BuildCodebook, MatchesTwoPassOracle) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        std::mt19937_64 rng(seed);
        const Matrix raw = oracle::random_matrix(rng, 64 + seed * 37, 16, 2.0, 0.3);
        const Matrix k = apply_normalization(raw, compute_channel_stats(raw));
        const Codebook cb = build_codebook(k, encode_keys(k));
        std::vector<std::size_t> sizes;
        const auto ref = oracle::two_pass_codebook(k, &sizes);
        for (std::size_t g = 0; g < 4; ++g) {
            for (std::size_t j = 0; j < 16; ++j) {
                EXPECT_EQ(cb.cluster_size(g, j), sizes[g * 16 + j]);
                for (std::size_t e = 0; e < 4; ++e) {
                    const long double want = ref[g * 16 + j][e];
                    EXPECT_LE(std::fabs(cb.centroid(g, j)[e] - want), 1e-6L * std::max(1.0L, std::fabs(want)));
                }
            }
        }
    }
}
