#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "sikv/common.hpp"
#include "sikv/op_counts.hpp"

namespace sikv {

inline constexpr std::size_t kSubvectorDim = 4;
inline constexpr std::size_t kCodebookSize = 16;

/// 4-bit sign code of a 4-element subvector, most-significant bit first:
/// bit (3 - i) is set iff element i is >= 0.
std::uint8_t encode_sign_code(std::span<const float, kSubvectorDim> subvector) noexcept;

/// The {-1,+1} vector whose sign code is `code`.
std::array<float, kSubvectorDim> sign_pattern(std::uint8_t code) noexcept;

/// L x G matrix of 4-bit sign codes, two per byte (even group in the low
/// nibble). The codes are both the key sign plane and the retrieval index.
class SignCodeMatrix {
public:
    SignCodeMatrix() = default;
    SignCodeMatrix(std::size_t tokens, std::size_t groups);

    /// Packs row-major unpacked codes; every code must be < 16.
    static SignCodeMatrix pack(std::size_t tokens, std::size_t groups,
                               std::span<const std::uint8_t> codes);
    /// Adopts an already packed buffer of tokens x row_bytes() bytes.
    static SignCodeMatrix from_packed(std::size_t tokens, std::size_t groups,
                                      std::vector<std::uint8_t> packed);
    std::vector<std::uint8_t> unpack() const;

    std::size_t tokens() const noexcept { return tokens_; }
    std::size_t groups() const noexcept { return groups_; }
    std::size_t dim() const noexcept { return groups_ * kSubvectorDim; }
    std::size_t row_bytes() const noexcept { return (groups_ + 1) / 2; }

    std::uint8_t code(std::size_t token, std::size_t group) const noexcept;
    void set_code(std::size_t token, std::size_t group, std::uint8_t code);

    /// +1 or -1 for element `channel` of token `token`, decoded from its code.
    float sign(std::size_t token, std::size_t channel) const noexcept;
    /// Flips the sign bit of one element.
    void flip_sign(std::size_t token, std::size_t channel);

    std::span<const std::uint8_t> packed() const noexcept { return packed_; }
    std::span<std::uint8_t> packed_mut() noexcept { return packed_; }
    std::span<const std::uint8_t> row(std::size_t token) const noexcept {
        return {packed_.data() + token * row_bytes(), row_bytes()};
    }

    /// Storage cost in bits, including nibble padding on odd group counts.
    std::size_t bit_cost() const noexcept { return packed_.size() * 8; }

    bool operator==(const SignCodeMatrix&) const = default;

private:
    std::size_t tokens_ = 0;
    std::size_t groups_ = 0;
    std::vector<std::uint8_t> packed_;
};

/// Sign codes of every 4-element group of every token. D must be a multiple of 4.
SignCodeMatrix encode_keys(const Matrix& normalized_keys);

/// Per-group table of 16 centroids in 4 dimensions. Centroid j of group g is
/// the mean of every group-g subvector with sign code j, or zero when no
/// subvector carries that code.
class Codebook {
public:
    Codebook() = default;
    explicit Codebook(std::size_t groups);

    std::size_t groups() const noexcept { return groups_; }
    std::size_t dim() const noexcept { return groups_ * kSubvectorDim; }

    std::span<const float, kSubvectorDim> centroid(std::size_t group, std::size_t code) const noexcept {
        return std::span<const float, kSubvectorDim>(
            centroids_.data() + (group * kCodebookSize + code) * kSubvectorDim, kSubvectorDim);
    }
    std::span<float, kSubvectorDim> centroid(std::size_t group, std::size_t code) noexcept {
        return std::span<float, kSubvectorDim>(
            centroids_.data() + (group * kCodebookSize + code) * kSubvectorDim, kSubvectorDim);
    }
    /// Number of subvectors assigned to (group, code) when the codebook was built.
    std::uint64_t cluster_size(std::size_t group, std::size_t code) const noexcept {
        return sizes_[group * kCodebookSize + code];
    }

    std::span<const float> data() const noexcept { return centroids_; }
    std::span<float> data_mut() noexcept { return centroids_; }
    std::span<const std::uint64_t> sizes() const noexcept { return sizes_; }
    std::span<std::uint64_t> sizes_mut() noexcept { return sizes_; }

    bool operator==(const Codebook&) const = default;

private:
    std::size_t groups_ = 0;
    std::vector<float> centroids_;    // groups x 16 x 4
    std::vector<std::uint64_t> sizes_;  // groups x 16
};

/// One-pass sign-based clustering: every subvector is read exactly once and
/// accumulated into its cluster's running sum (double) and count.
Codebook build_codebook(const Matrix& normalized_keys, const SignCodeMatrix& codes,
                        OpCounts* ops = nullptr);

}  // namespace sikv
