#include "sikv/normalize.hpp"

#include <cmath>
#include <numeric>

namespace sikv {

NormalizationState compute_channel_stats(const Matrix& keys) {
    if (keys.rows() == 0 || keys.cols() == 0) {
        throw DimensionError("compute_channel_stats: empty key matrix " +
                             shape_string(keys.rows(), keys.cols()));
    }
    require_finite(keys.flat(), "compute_channel_stats");

    const std::size_t tokens = keys.rows();
    const std::size_t dim = keys.cols();
    std::vector<double> sums(dim, 0.0);
    for (std::size_t i = 0; i < tokens; ++i) {
        const auto row = keys.row(i);
        for (std::size_t d = 0; d < dim; ++d) sums[d] += row[d];
    }

    NormalizationState state;
    state.mu.resize(dim);
    for (std::size_t d = 0; d < dim; ++d) {
        state.mu[d] = static_cast<float>(sums[d] / static_cast<double>(tokens));
    }

    // alpha must match the K' that apply_normalization produces, so it is taken
    // over the same float subtraction.
    state.alpha.assign(dim, 0.0f);
    for (std::size_t i = 0; i < tokens; ++i) {
        const auto row = keys.row(i);
        for (std::size_t d = 0; d < dim; ++d) {
            state.alpha[d] = std::fmax(state.alpha[d], std::fabs(row[d] - state.mu[d]));
        }
    }
    return state;
}

Matrix apply_normalization(const Matrix& keys, const NormalizationState& state) {
    if (keys.cols() != state.dim()) {
        throw DimensionError("apply_normalization: keys have " + std::to_string(keys.cols()) +
                             " channels, state has " + std::to_string(state.dim()));
    }
    Matrix out(keys.rows(), keys.cols());
    for (std::size_t i = 0; i < keys.rows(); ++i) {
        const auto src = keys.row(i);
        auto dst = out.row(i);
        for (std::size_t d = 0; d < keys.cols(); ++d) dst[d] = src[d] - state.mu[d];
    }
    return out;
}

Matrix sign_matrix(const Matrix& x) {
    Matrix out(x.rows(), x.cols());
    const auto src = x.flat();
    auto dst = out.flat();
    for (std::size_t i = 0; i < src.size(); ++i) dst[i] = sign_of(src[i]);
    return out;
}

std::vector<double> sign_entropy(const Matrix& signs) {
    if (signs.rows() == 0) throw DimensionError("sign_entropy: no rows");
    for (float s : signs.flat()) {
        if (s != 1.0f && s != -1.0f) throw ValidationError("sign_entropy: entries must be -1 or +1");
    }
    std::vector<double> entropy(signs.cols(), 0.0);
    for (std::size_t d = 0; d < signs.cols(); ++d) {
        std::size_t positive = 0;
        for (std::size_t i = 0; i < signs.rows(); ++i) positive += signs(i, d) > 0.0f;
        const double p = static_cast<double>(positive) / static_cast<double>(signs.rows());
        double h = 0.0;
        if (p > 0.0) h -= p * std::log2(p);
        if (p < 1.0) h -= (1.0 - p) * std::log2(1.0 - p);
        entropy[d] = h;
    }
    return entropy;
}

double mean_sign_entropy(const Matrix& x) {
    const auto h = sign_entropy(sign_matrix(x));
    return std::accumulate(h.begin(), h.end(), 0.0) / static_cast<double>(h.size());
}

}  // namespace sikv
