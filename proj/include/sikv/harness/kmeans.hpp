#pragma once

#include <cstdint>
#include <vector>

#include "sikv/codebook.hpp"
#include "sikv/common.hpp"
#include "sikv/op_counts.hpp"

namespace sikv::harness {

struct KMeansResult {
    Codebook codebook;
    std::vector<std::uint8_t> assignments;  // tokens x groups, row-major
};

/// Lloyd's k-means with 16 centroids per 4-dim group, the iterative reference
/// the one-pass build is measured against. Seeded Forgy initialization; an
/// empty cluster keeps its previous centroid. Each iteration counts L*G
/// assignment scans, 16*L*G distance evaluations and 2*L*G subvector reads.
KMeansResult kmeans_codebook(const Matrix& normalized_keys, std::size_t iterations, std::uint64_t seed,
                             OpCounts* ops = nullptr);

}  // namespace sikv::harness
