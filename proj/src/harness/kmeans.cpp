#include "sikv/harness/kmeans.hpp"

#include <array>
#include <limits>
#include <random>

namespace sikv::harness {

KMeansResult kmeans_codebook(const Matrix& kn, std::size_t iterations, std::uint64_t seed, OpCounts* ops) {
    if (kn.cols() == 0 || kn.cols() % kSubvectorDim != 0) {
        throw DimensionError("kmeans_codebook: key width " + std::to_string(kn.cols()) +
                             " is not a positive multiple of 4");
    }
    const std::size_t L = kn.rows();
    const std::size_t G = kn.cols() / kSubvectorDim;
    KMeansResult result{Codebook(G), std::vector<std::uint8_t>(L * G, 0)};
    if (L == 0) return result;

    std::uint64_t scans = 0, evals = 0, reads = 0;
    const auto n_groups = static_cast<std::ptrdiff_t>(G);
#pragma omp parallel for schedule(static) reduction(+ : scans, evals, reads)
    for (std::ptrdiff_t gi = 0; gi < n_groups; ++gi) {
        const auto g = static_cast<std::size_t>(gi);
        std::mt19937_64 rng(seed * 0x9E3779B97F4A7C15ULL + g);
        std::uniform_int_distribution<std::size_t> pick(0, L - 1);
        std::array<std::array<double, kSubvectorDim>, kCodebookSize> c{};
        for (auto& centroid : c) {
            const std::size_t i = pick(rng);
            for (std::size_t e = 0; e < kSubvectorDim; ++e) centroid[e] = kn(i, g * kSubvectorDim + e);
        }
        std::array<std::uint64_t, kCodebookSize> sizes{};
        for (std::size_t it = 0; it < iterations; ++it) {
            for (std::size_t i = 0; i < L; ++i) {
                double best = std::numeric_limits<double>::infinity();
                std::uint8_t arg = 0;
                ++scans;
                ++reads;
                for (std::size_t j = 0; j < kCodebookSize; ++j) {
                    ++evals;
                    double d2 = 0.0;
                    for (std::size_t e = 0; e < kSubvectorDim; ++e) {
                        const double diff = kn(i, g * kSubvectorDim + e) - c[j][e];
                        d2 += diff * diff;
                    }
                    if (d2 < best) {
                        best = d2;
                        arg = static_cast<std::uint8_t>(j);
                    }
                }
                result.assignments[i * G + g] = arg;
            }
            std::array<std::array<double, kSubvectorDim>, kCodebookSize> sums{};
            sizes.fill(0);
            for (std::size_t i = 0; i < L; ++i) {
                const std::uint8_t j = result.assignments[i * G + g];
                ++reads;
                for (std::size_t e = 0; e < kSubvectorDim; ++e) sums[j][e] += kn(i, g * kSubvectorDim + e);
                ++sizes[j];
            }
            for (std::size_t j = 0; j < kCodebookSize; ++j) {
                if (sizes[j] == 0) continue;
                for (std::size_t e = 0; e < kSubvectorDim; ++e) c[j][e] = sums[j][e] / static_cast<double>(sizes[j]);
            }
        }
        for (std::size_t j = 0; j < kCodebookSize; ++j) {
            auto out = result.codebook.centroid(g, j);
            for (std::size_t e = 0; e < kSubvectorDim; ++e) out[e] = static_cast<float>(c[j][e]);
            result.codebook.sizes_mut()[g * kCodebookSize + j] = sizes[j];
        }
    }

    if (ops) {
        ops->assignment_scans += scans;
        ops->distance_evals += evals;
        ops->subvector_reads += reads;
    }
    return result;
}

}  // namespace sikv::harness
