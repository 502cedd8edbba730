#pragma once

#include <span>
#include <vector>

#include "sikv/common.hpp"

namespace sikv {

/// Per-channel statistics of one head's prefill key cache.
///
/// `mu` is the channel mean of the raw keys. `alpha` is the channel-wise
/// maximum absolute value of the mean-normalized keys K' = K - mu; it is zero
/// only for a channel of K' that is identically zero. Both are frozen after
/// prefill.
struct NormalizationState {
    std::vector<float> mu;
    std::vector<float> alpha;

    std::size_t dim() const noexcept { return mu.size(); }
    bool operator==(const NormalizationState&) const = default;
};

/// Channel means (double accumulation) and magnitude scales of K - mu.
/// Throws DimensionError on an empty matrix and ValidationError on non-finite input.
NormalizationState compute_channel_stats(const Matrix& keys);

/// K' = K - mu, row-broadcast.
Matrix apply_normalization(const Matrix& keys, const NormalizationState& state);

/// +1 for x >= 0 (including +0 and -0), -1 otherwise.
inline float sign_of(float x) noexcept { return x >= 0.0f ? 1.0f : -1.0f; }

/// Elementwise sign_of.
Matrix sign_matrix(const Matrix& x);

/// Empirical binary entropy in bits of each column of a {-1,+1} matrix, with
/// p the fraction of +1 entries and 0 log 0 = 0.
std::vector<double> sign_entropy(const Matrix& signs);

/// Mean over channels of sign_entropy(sign_matrix(x)).
double mean_sign_entropy(const Matrix& x);

}  // namespace sikv
