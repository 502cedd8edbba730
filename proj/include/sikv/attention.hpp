#pragma once

#include <span>
#include <vector>

#include "sikv/cache.hpp"
#include "sikv/common.hpp"
#include "sikv/op_counts.hpp"
#include "sikv/retrieval.hpp"

namespace sikv {

struct AttentionOutput {
    std::vector<float> out;
    double weights_checksum = 0.0;  // sum of the softmax weights actually used
};

struct ErrorReport {
    double cosine_sim = 0.0;
    double rel_l2 = 0.0;
};

/// Max-subtracted softmax in double precision.
std::vector<double> stable_softmax(std::span<const double> logits);

/// softmax(q K^T / sqrt(D)) V over every row. Throws ValidationError if L == 0.
AttentionOutput exact_attention(std::span<const float> query, const Matrix& keys,
                                const Matrix& values);

/// Attention restricted to `selection`. Keys of dynamically selected tokens
/// come from the quantized planes, sink and recent tokens from their
/// full-precision rows; only the selected rows are ever reconstructed.
AttentionOutput sparse_attention(std::span<const float> query, const TokenSelection& selection,
                                 const SelfIndexingCache& cache, OpCounts* ops = nullptr);

/// Cosine similarity and relative L2 distance of a against reference b.
/// rel_l2 is 0 when both are zero; cosine is 1 for two zero vectors and 0 when
/// only one of them is zero.
ErrorReport output_error(const AttentionOutput& a, const AttentionOutput& b);
ErrorReport output_error(std::span<const float> a, std::span<const float> b);

}  // namespace sikv
