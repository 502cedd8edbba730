#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <string>

#include "sikv/op_counts.hpp"
#include "sikv/retrieval.hpp"

namespace sikv::harness {

/// One line of a benchmark report. Every record serializes the same key set;
/// fields that do not apply to a bench are written as null.
struct ReportRecord {
    std::string bench;
    std::uint64_t seed = 0;
    std::size_t L = 0;
    std::size_t D = 0;
    int bits = 0;
    std::optional<TokenBudget> budget;
    std::string ablation;
    std::optional<double> recall_at_k;
    std::optional<double> cosine_mean;
    std::optional<double> cosine_std;
    std::optional<double> bits_per_token;
    std::optional<double> savings_fraction;
    std::optional<double> wall_ms;
    std::optional<OpCounts> op_counts;
};

std::string to_json_line(const ReportRecord& record);
void write_jsonl(std::ostream& out, std::span<const ReportRecord> records);

}  // namespace sikv::harness
