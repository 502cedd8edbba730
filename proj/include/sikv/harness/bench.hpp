#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sikv/cache.hpp"
#include "sikv/harness/report.hpp"
#include "sikv/harness/synthetic.hpp"
#include "sikv/op_counts.hpp"

namespace sikv::harness {

enum class Ablation { full, no_sign_quant, sign_only_retrieval, no_sink };

std::string_view ablation_name(Ablation a) noexcept;
/// Accepts the four variant names; throws ValidationError otherwise.
Ablation parse_ablation(std::string_view name);
std::vector<Ablation> all_ablations();

struct BenchConfig {
    std::size_t tokens = 4096;
    std::size_t dim = 128;
    std::uint64_t seed = 0;
    int bits = 2;
    std::size_t group_size = 32;
    std::size_t sink_count = 64;
    std::optional<std::size_t> budget;  // total tokens attended
    std::optional<double> sparsity;     // fraction of the cache attended
    std::vector<Ablation> ablations{Ablation::full};
    std::size_t queries = 16;
    std::size_t heads = 1;  // head h uses seed + h
    bool use_window = true;  // observation-window sink selection when a window exists
    WorkloadConfig workload;  // shape, seed and query count are taken from the fields above

    /// Exactly one of budget/sparsity, a valid quant config, nonempty ablations.
    void validate() const;
    TokenBudget token_budget() const;
    CacheConfig cache_config(Ablation a) const;
    WorkloadConfig workload_for(std::size_t head) const;
};

/// Builds the cache a variant runs on: the window is used for sink selection
/// only when `use_window` is set and the workload has one.
SelfIndexingCache build_cache(const BenchConfig& config, Ablation a, const Workload& w);
LutMode lut_mode(Ablation a) noexcept;

struct VariantSummary {
    Ablation ablation = Ablation::full;
    std::vector<double> per_head;  // mean over that head's queries
    double mean = 0.0;
    double std = 0.0;  // over every (head, query) sample
};

struct RecallReport {
    std::size_t k = 0;             // dynamic tokens compared per query
    std::size_t candidates = 0;    // non-forced prefill tokens of the full variant
    std::vector<VariantSummary> variants;
    VariantSummary random_baseline;  // measured uniform selection
    double expected_random = 0.0;    // k / candidates
    std::vector<std::string> warnings;
    double wall_ms = 0.0;

    const VariantSummary* find(Ablation a) const;
    std::vector<ReportRecord> records(const BenchConfig& config) const;
};

/// Per query: exact q.K'^T top-k against compressed-domain top-k over the
/// dynamically selectable tokens (sinks excluded). A budget larger than the
/// cache is clamped with a warning. `external` replaces the synthetic
/// workload (one head).
RecallReport run_recall_bench(const BenchConfig& config, const Workload* external = nullptr);

struct AttentionReport {
    std::vector<VariantSummary> variants;  // cosine similarity to exact attention
    std::vector<double> rel_l2_mean;       // parallel to variants
    double wall_ms = 0.0;

    const VariantSummary* find(Ablation a) const;
    std::vector<ReportRecord> records(const BenchConfig& config) const;
};

/// Per query: cosine between sparse_attention and exact attention over the
/// full-precision (K', V).
AttentionReport run_attention_bench(const BenchConfig& config, const Workload* external = nullptr);

struct MicroReport {
    OpCounts lut_scoring;     // one query over L tokens
    OpCounts dense_scoring;
    OpCounts one_pass_build;
    OpCounts kmeans_build;
    OpCounts sparse_attention;
    std::size_t kmeans_iterations = 20;
    std::size_t selected = 0;  // tokens attended by the sparse step
    double lut_ms = 0.0;
    double dense_ms = 0.0;
    double one_pass_ms = 0.0;
    double kmeans_ms = 0.0;
    double sparse_ms = 0.0;
    double full_ms = 0.0;

    std::vector<ReportRecord> records(const BenchConfig& config) const;
};

/// Operation counts plus host wall-clock (median of `repeats`) for scoring,
/// codebook construction and attention.
MicroReport run_micro_bench(const BenchConfig& config, const Workload* external = nullptr,
                            std::size_t repeats = 5);

ReportRecord memory_record(const BenchConfig& config);

}  // namespace sikv::harness
