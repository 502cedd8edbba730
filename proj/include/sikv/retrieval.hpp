#pragma once

#include <cstddef>
#include <span>
#include <variant>
#include <vector>

#include "sikv/codebook.hpp"
#include "sikv/common.hpp"
#include "sikv/op_counts.hpp"

namespace sikv {

/// Query-by-centroid dot products: table[g][j] = q_g . centroid[g][j].
class LookupTable {
public:
    LookupTable() = default;
    explicit LookupTable(std::size_t groups) : groups_(groups), table_(groups * kCodebookSize, 0.0f) {}

    std::size_t groups() const noexcept { return groups_; }
    float at(std::size_t group, std::size_t code) const noexcept { return table_[group * kCodebookSize + code]; }
    float& at(std::size_t group, std::size_t code) noexcept { return table_[group * kCodebookSize + code]; }
    std::span<const float> data() const noexcept { return table_; }

private:
    std::size_t groups_ = 0;
    std::vector<float> table_;
};

LookupTable build_lut(std::span<const float> query, const Codebook& codebook);

/// Sign-only table: table[g][j] = q_g . sign_pattern(j). Drops the magnitude
/// information carried by the centroids.
LookupTable build_sign_lut(std::span<const float> query, std::size_t groups);

/// score[i] = sum_g table[g][code(i, g)]: L*G lookups and L*(G-1) additions.
std::vector<float> score_tokens(const LookupTable& lut, const SignCodeMatrix& codes,
                                OpCounts* ops = nullptr);

/// Exact q . k_i for every row of `keys`.
std::vector<float> dense_scores(std::span<const float> query, const Matrix& keys,
                                OpCounts* ops = nullptr);

struct SelectionBreakdown {
    std::size_t sink = 0;
    std::size_t recent = 0;  // recent tokens not already counted as sink
    std::size_t dynamic = 0;
    bool operator==(const SelectionBreakdown&) const = default;
};

/// Tokens that take part in one sparse attention step.
struct TokenSelection {
    std::vector<std::size_t> indices;  // ascending, unique
    SelectionBreakdown breakdown;
};

/// sink ∪ recent ∪ the k highest-scoring remaining positions. Ties go to the
/// lower index; if fewer than k positions remain, all of them are taken.
/// Scores of forced positions are ignored. Throws ValidationError for forced
/// indices outside [0, scores.size()).
TokenSelection top_k_select(std::span<const float> scores, std::size_t k,
                            std::span<const std::size_t> sink,
                            std::span<const std::size_t> recent);

/// Attention budget: either a total token count or a fraction of the cache.
struct TokenBudget {
    std::variant<std::size_t, double> value;

    static TokenBudget tokens(std::size_t n) { return {n}; }
    static TokenBudget fraction(double f) { return {f}; }

    /// Number of dynamically selected tokens once `forced` tokens are taken.
    /// A token budget gives max(0, n - forced); a fraction gives
    /// max(1, round(f * length) - forced).
    std::size_t dynamic_k(std::size_t length, std::size_t forced) const;
    /// Total tokens the budget asks for over a cache of `length`.
    std::size_t total(std::size_t length) const;
};

}  // namespace sikv
