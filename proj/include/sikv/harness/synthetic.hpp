#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "sikv/common.hpp"

namespace sikv::harness {

struct WorkloadConfig {
    std::size_t tokens = 4096;
    std::size_t dim = 128;
    std::uint64_t seed = 0;
    double offset_sigma = 0.5;         // |channel offset| in units of that channel's std
    double scale_spread = 0.5;         // channel std drawn from [1 - spread, 1 + spread]
    double correlated_fraction = 1.0;  // queries built from a random key row
    double query_noise = 1.0;          // noise std relative to the key channel std
    double query_scale = 0.5;          // overall query magnitude (sets attention sharpness)
    std::size_t queries = 16;
    std::size_t window = 32;           // observation-window queries for sink selection
};

inline constexpr std::size_t kUnpaired = std::numeric_limits<std::size_t>::max();

struct Workload {
    Matrix keys;
    Matrix values;
    Matrix queries;
    Matrix window;
    std::vector<std::size_t> paired_key;  // per query; kUnpaired when uncorrelated
    std::vector<float> channel_offset;
    std::vector<float> channel_scale;
};

/// Deterministic for a given config. Keys are Gaussian with a nonzero
/// per-channel offset; correlated queries are scaled noisy copies of a random
/// key row; values are independent standard Gaussian.
Workload gen_synthetic(const WorkloadConfig& config);

}  // namespace sikv::harness
