#pragma once

#include <cstdint>

namespace sikv {

/// Arithmetic and memory-touch counters filled by instrumented kernel calls.
/// Kernels only count when handed a non-null pointer; the uninstrumented path
/// carries no counting code.
struct OpCounts {
    std::uint64_t table_lookups = 0;
    std::uint64_t adds = 0;
    std::uint64_t multiplies = 0;
    std::uint64_t subvector_reads = 0;   // 4-element key subvectors consumed by clustering
    std::uint64_t assignment_scans = 0;  // subvector-to-centroid assignment passes (k-means)
    std::uint64_t distance_evals = 0;    // subvector-centroid distance computations (k-means)
    std::uint64_t dequantized_rows = 0;  // token rows reconstructed from quantized planes
    std::uint64_t full_precision_rows = 0;

    OpCounts& operator+=(const OpCounts& o) noexcept {
        table_lookups += o.table_lookups;
        adds += o.adds;
        multiplies += o.multiplies;
        subvector_reads += o.subvector_reads;
        assignment_scans += o.assignment_scans;
        distance_evals += o.distance_evals;
        dequantized_rows += o.dequantized_rows;
        full_precision_rows += o.full_precision_rows;
        return *this;
    }

    bool operator==(const OpCounts&) const = default;
};

}  // namespace sikv
