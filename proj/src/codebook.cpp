#include "sikv/codebook.hpp"

#include "sikv/kernels.hpp"

namespace sikv {

std::uint8_t encode_sign_code(std::span<const float, kSubvectorDim> subvector) noexcept {
    return kernels::sign_code_of(subvector.data());
}

std::array<float, kSubvectorDim> sign_pattern(std::uint8_t code) noexcept {
    std::array<float, kSubvectorDim> pattern{};
    for (std::size_t i = 0; i < kSubvectorDim; ++i) {
        pattern[i] = (code >> (kSubvectorDim - 1 - i)) & 1 ? 1.0f : -1.0f;
    }
    return pattern;
}

SignCodeMatrix::SignCodeMatrix(std::size_t tokens, std::size_t groups)
    : tokens_(tokens), groups_(groups), packed_(tokens * ((groups + 1) / 2), 0) {}

SignCodeMatrix SignCodeMatrix::pack(std::size_t tokens, std::size_t groups,
                                    std::span<const std::uint8_t> codes) {
    if (codes.size() != tokens * groups) {
        throw DimensionError("SignCodeMatrix::pack: expected " + std::to_string(tokens * groups) +
                             " codes, got " + std::to_string(codes.size()));
    }
    SignCodeMatrix m(tokens, groups);
    for (std::size_t i = 0; i < tokens; ++i) {
        for (std::size_t g = 0; g < groups; ++g) m.set_code(i, g, codes[i * groups + g]);
    }
    return m;
}

SignCodeMatrix SignCodeMatrix::from_packed(std::size_t tokens, std::size_t groups,
                                           std::vector<std::uint8_t> packed) {
    SignCodeMatrix m;
    m.tokens_ = tokens;
    m.groups_ = groups;
    if (packed.size() != tokens * m.row_bytes()) {
        throw DimensionError("SignCodeMatrix::from_packed: expected " +
                             std::to_string(tokens * m.row_bytes()) + " bytes, got " +
                             std::to_string(packed.size()));
    }
    m.packed_ = std::move(packed);
    return m;
}

std::vector<std::uint8_t> SignCodeMatrix::unpack() const {
    std::vector<std::uint8_t> codes(tokens_ * groups_);
    for (std::size_t i = 0; i < tokens_; ++i) {
        for (std::size_t g = 0; g < groups_; ++g) codes[i * groups_ + g] = code(i, g);
    }
    return codes;
}

std::uint8_t SignCodeMatrix::code(std::size_t token, std::size_t group) const noexcept {
    return kernels::sign_code_at(packed_.data() + token * row_bytes(), group);
}

void SignCodeMatrix::set_code(std::size_t token, std::size_t group, std::uint8_t code) {
    if (code >= kCodebookSize) throw ValidationError("sign code out of range: " + std::to_string(code));
    std::uint8_t& byte = packed_[token * row_bytes() + group / 2];
    if (group & 1) {
        byte = static_cast<std::uint8_t>((byte & 0x0F) | (code << 4));
    } else {
        byte = static_cast<std::uint8_t>((byte & 0xF0) | code);
    }
}

float SignCodeMatrix::sign(std::size_t token, std::size_t channel) const noexcept {
    const std::uint8_t c = code(token, channel / kSubvectorDim);
    const std::size_t bit = kSubvectorDim - 1 - channel % kSubvectorDim;
    return (c >> bit) & 1 ? 1.0f : -1.0f;
}

void SignCodeMatrix::flip_sign(std::size_t token, std::size_t channel) {
    const std::size_t group = channel / kSubvectorDim;
    const std::size_t bit = kSubvectorDim - 1 - channel % kSubvectorDim;
    set_code(token, group, static_cast<std::uint8_t>(code(token, group) ^ (1u << bit)));
}

SignCodeMatrix encode_keys(const Matrix& normalized_keys) {
    const std::size_t dim = normalized_keys.cols();
    if (dim == 0 || dim % kSubvectorDim != 0) {
        throw DimensionError("encode_keys: dimension " + std::to_string(dim) +
                             " is not a positive multiple of 4");
    }
    SignCodeMatrix codes(normalized_keys.rows(), dim / kSubvectorDim);
    kernels::omp::encode_sign_codes(normalized_keys.flat(), normalized_keys.rows(), dim,
                                    codes.packed_mut());
    return codes;
}

Codebook::Codebook(std::size_t groups)
    : groups_(groups),
      centroids_(groups * kCodebookSize * kSubvectorDim, 0.0f),
      sizes_(groups * kCodebookSize, 0) {}

Codebook build_codebook(const Matrix& normalized_keys, const SignCodeMatrix& codes,
                        OpCounts* ops) {
    if (normalized_keys.rows() != codes.tokens() || normalized_keys.cols() != codes.dim()) {
        throw DimensionError("build_codebook: keys " +
                             shape_string(normalized_keys.rows(), normalized_keys.cols()) +
                             " do not match codes for " + std::to_string(codes.tokens()) +
                             " tokens x " + std::to_string(codes.groups()) + " groups");
    }
    const std::size_t groups = codes.groups();
    std::vector<double> sums(groups * kCodebookSize * kSubvectorDim, 0.0);
    Codebook book(groups);
    kernels::omp::accumulate_centroids(normalized_keys.flat(), codes.tokens(), codes.dim(),
                                       codes.packed(), sums, book.sizes_mut(), ops);

    auto centroids = book.data_mut();
    const auto sizes = book.sizes();
    for (std::size_t c = 0; c < sizes.size(); ++c) {
        if (sizes[c] == 0) continue;
        const double n = static_cast<double>(sizes[c]);
        for (std::size_t e = 0; e < kSubvectorDim; ++e) {
            centroids[c * kSubvectorDim + e] = static_cast<float>(sums[c * kSubvectorDim + e] / n);
        }
    }
    return book;
}

}  // namespace sikv
