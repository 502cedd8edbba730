#include "sikv/harness/bench.hpp"

#include <algorithm>
#include <chrono>
#include <exception>
#include <random>

#include "sikv/attention.hpp"
#include "sikv/harness/kmeans.hpp"
#include "sikv/harness/stats.hpp"

namespace sikv::harness {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point start) {
    return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

template <class F>
double median_ms(std::size_t repeats, F&& f) {
    std::vector<double> t;
    for (std::size_t r = 0; r < std::max<std::size_t>(1, repeats); ++r) {
        const auto start = Clock::now();
        f();
        t.push_back(elapsed_ms(start));
    }
    std::nth_element(t.begin(), t.begin() + static_cast<std::ptrdiff_t>(t.size() / 2), t.end());
    return t[t.size() / 2];
}

// Heads are independent; each writes only its own slot, so the result does not
// depend on scheduling.
template <class F>
void for_each_head(std::size_t heads, F&& f) {
    std::exception_ptr error;
    const auto n = static_cast<std::ptrdiff_t>(heads);
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t h = 0; h < n; ++h) {
        try {
            f(static_cast<std::size_t>(h));
        } catch (...) {
#pragma omp critical(sikv_bench_error)
            if (!error) error = std::current_exception();
        }
    }
    if (error) std::rethrow_exception(error);
}

Workload workload_of(const BenchConfig& config, const Workload* external, std::size_t head) {
    return external ? *external : gen_synthetic(config.workload_for(head));
}

std::size_t head_count(const BenchConfig& config, const Workload* external) {
    return external ? 1 : config.heads;
}

Matrix normalized_keys(const Workload& w) {
    return apply_normalization(w.keys, compute_channel_stats(w.keys));
}

std::size_t overlap(const std::vector<std::size_t>& a, const std::vector<std::size_t>& b) {
    std::size_t n = 0;
    auto i = a.begin();
    auto j = b.begin();
    while (i != a.end() && j != b.end()) {
        if (*i < *j) {
            ++i;
        } else if (*j < *i) {
            ++j;
        } else {
            ++n;
            ++i;
            ++j;
        }
    }
    return n;
}

VariantSummary summarize(Ablation a, const std::vector<std::vector<double>>& per_head_samples) {
    VariantSummary s;
    s.ablation = a;
    std::vector<double> all;
    for (const auto& samples : per_head_samples) {
        s.per_head.push_back(mean(samples));
        all.insert(all.end(), samples.begin(), samples.end());
    }
    s.mean = mean(all);
    s.std = stddev(all);
    return s;
}

ReportRecord base_record(const BenchConfig& c, std::string bench, std::string ablation) {
    ReportRecord r;
    r.bench = std::move(bench);
    r.seed = c.seed;
    r.L = c.tokens;
    r.D = c.dim;
    r.bits = c.bits;
    r.budget = c.token_budget();
    r.ablation = std::move(ablation);
    return r;
}

}  // namespace

std::string_view ablation_name(Ablation a) noexcept {
    switch (a) {
        case Ablation::full: return "full";
        case Ablation::no_sign_quant: return "no_sign_quant";
        case Ablation::sign_only_retrieval: return "sign_only_retrieval";
        case Ablation::no_sink: return "no_sink";
    }
    return "unknown";
}

Ablation parse_ablation(std::string_view name) {
    for (Ablation a : all_ablations()) {
        if (ablation_name(a) == name) return a;
    }
    throw ValidationError("unknown ablation \"" + std::string(name) +
                          "\" (expected full, no_sign_quant, sign_only_retrieval or no_sink)");
}

std::vector<Ablation> all_ablations() {
    return {Ablation::full, Ablation::no_sign_quant, Ablation::sign_only_retrieval, Ablation::no_sink};
}

void BenchConfig::validate() const {
    if (tokens == 0 || dim == 0) throw ValidationError("bench: tokens and dim must be positive");
    if (dim % kSubvectorDim != 0) {
        throw DimensionError("bench: dim " + std::to_string(dim) + " is not a multiple of 4");
    }
    if (budget.has_value() == sparsity.has_value()) {
        throw ValidationError("bench: set exactly one of budget and sparsity");
    }
    if (sparsity && !(*sparsity > 0.0 && *sparsity <= 1.0)) {
        throw ValidationError("bench: sparsity must lie in (0, 1]");
    }
    QuantConfig{bits, group_size}.validate(dim);
    if (ablations.empty()) throw ValidationError("bench: no ablation variant selected");
    if (queries == 0 || heads == 0) throw ValidationError("bench: queries and heads must be positive");
}

TokenBudget BenchConfig::token_budget() const {
    return budget ? TokenBudget::tokens(*budget) : TokenBudget::fraction(sparsity.value_or(1.0));
}

CacheConfig BenchConfig::cache_config(Ablation a) const {
    CacheConfig c;
    c.quant = QuantConfig{bits, group_size};
    c.sink_count = a == Ablation::no_sink ? 0 : sink_count;
    c.key_encoding = a == Ablation::no_sign_quant ? KeyEncoding::signed_values : KeyEncoding::sign_magnitude;
    return c;
}

WorkloadConfig BenchConfig::workload_for(std::size_t head) const {
    WorkloadConfig w = workload;
    w.tokens = tokens;
    w.dim = dim;
    w.seed = seed + head;
    w.queries = queries;
    return w;
}

SelfIndexingCache build_cache(const BenchConfig& config, Ablation a, const Workload& w) {
    const CacheConfig cc = config.cache_config(a);
    if (config.use_window && w.window.rows() > 0) return prefill(w.keys, w.values, w.window, cc);
    return prefill(w.keys, w.values, cc);
}

LutMode lut_mode(Ablation a) noexcept {
    return a == Ablation::sign_only_retrieval ? LutMode::sign_pattern : LutMode::centroid;
}

const VariantSummary* RecallReport::find(Ablation a) const {
    for (const auto& v : variants) {
        if (v.ablation == a) return &v;
    }
    return nullptr;
}

const VariantSummary* AttentionReport::find(Ablation a) const {
    for (const auto& v : variants) {
        if (v.ablation == a) return &v;
    }
    return nullptr;
}

RecallReport run_recall_bench(const BenchConfig& config, const Workload* external) {
    config.validate();
    const auto start = Clock::now();
    const std::size_t heads = head_count(config, external);
    const std::size_t nv = config.ablations.size();
    const TokenBudget budget = config.token_budget();

    // samples[v][h] = per-query recalls; index nv holds the random baseline.
    std::vector<std::vector<std::vector<double>>> samples(nv + 1, std::vector<std::vector<double>>(heads));
    std::vector<std::size_t> head_k(heads), head_candidates(heads);
    std::vector<char> clamped(heads, 0);

    for_each_head(heads, [&](std::size_t h) {
        const Workload w = workload_of(config, external, h);
        const Matrix kn = normalized_keys(w);
        const std::size_t L = w.keys.rows();
        std::vector<std::vector<float>> exact(w.queries.rows());
        for (std::size_t q = 0; q < w.queries.rows(); ++q) exact[q] = dense_scores(w.queries.row(q), kn);

        for (std::size_t v = 0; v < nv; ++v) {
            const Ablation a = config.ablations[v];
            const SelfIndexingCache cache = build_cache(config, a, w);
            const std::vector<std::size_t> forced(cache.sink_positions().begin(), cache.sink_positions().end());
            const std::size_t candidates = L - forced.size();
            std::size_t k = budget.dynamic_k(L, forced.size());
            if (k > candidates) {
                k = candidates;
                clamped[h] = 1;
            }
            if (v == 0) {
                head_k[h] = k;
                head_candidates[h] = candidates;
            }

            std::vector<std::size_t> pool;
            std::mt19937_64 rng(config.seed + h + 0x5EED);
            if (v == 0) {
                for (std::size_t i = 0; i < L; ++i) {
                    if (!cache.is_sink(i)) pool.push_back(i);
                }
            }
            for (std::size_t q = 0; q < w.queries.rows(); ++q) {
                if (k == 0) {
                    samples[v][h].push_back(1.0);
                    continue;
                }
                const auto truth = top_k_select(exact[q], k, forced, {}).indices;
                const auto got = retrieve(cache, w.queries.row(q), k, lut_mode(a)).indices;
                const double hits = static_cast<double>(overlap(truth, got) - forced.size());
                samples[v][h].push_back(hits / static_cast<double>(k));
                if (v == 0) {
                    std::vector<std::size_t> pick;
                    std::sample(pool.begin(), pool.end(), std::back_inserter(pick), k, rng);
                    std::vector<std::size_t> truth_dynamic;
                    std::set_difference(truth.begin(), truth.end(), forced.begin(), forced.end(),
                                        std::back_inserter(truth_dynamic));
                    samples[nv][h].push_back(static_cast<double>(overlap(truth_dynamic, pick)) /
                                             static_cast<double>(k));
                }
            }
        }
    });

    RecallReport report;
    report.k = head_k.front();
    report.candidates = head_candidates.front();
    for (std::size_t v = 0; v < nv; ++v) report.variants.push_back(summarize(config.ablations[v], samples[v]));
    report.random_baseline = summarize(config.ablations.front(), samples[nv]);
    report.expected_random =
        report.candidates == 0 ? 0.0 : static_cast<double>(report.k) / static_cast<double>(report.candidates);
    if (std::ranges::any_of(clamped, [](char c) { return c != 0; })) {
        report.warnings.push_back("budget exceeds the selectable tokens; clamped to " +
                                  std::to_string(report.k));
    }
    report.wall_ms = elapsed_ms(start);
    return report;
}

std::vector<ReportRecord> RecallReport::records(const BenchConfig& config) const {
    std::vector<ReportRecord> out;
    for (const auto& v : variants) {
        ReportRecord r = base_record(config, "recall", std::string(ablation_name(v.ablation)));
        r.recall_at_k = v.mean;
        r.wall_ms = wall_ms;
        out.push_back(std::move(r));
    }
    ReportRecord r = base_record(config, "recall", "random_baseline");
    r.recall_at_k = random_baseline.mean;
    r.wall_ms = wall_ms;
    out.push_back(std::move(r));
    return out;
}

AttentionReport run_attention_bench(const BenchConfig& config, const Workload* external) {
    config.validate();
    const auto start = Clock::now();
    const std::size_t heads = head_count(config, external);
    const std::size_t nv = config.ablations.size();
    const TokenBudget budget = config.token_budget();

    std::vector<std::vector<std::vector<double>>> cosine(nv, std::vector<std::vector<double>>(heads));
    std::vector<std::vector<std::vector<double>>> rel(nv, std::vector<std::vector<double>>(heads));

    for_each_head(heads, [&](std::size_t h) {
        const Workload w = workload_of(config, external, h);
        const Matrix kn = normalized_keys(w);
        const std::size_t L = w.keys.rows();
        std::vector<AttentionOutput> exact;
        for (std::size_t q = 0; q < w.queries.rows(); ++q) {
            exact.push_back(exact_attention(w.queries.row(q), kn, w.values));
        }
        for (std::size_t v = 0; v < nv; ++v) {
            const Ablation a = config.ablations[v];
            const SelfIndexingCache cache = build_cache(config, a, w);
            const std::size_t k = budget.dynamic_k(L, cache.sink_positions().size());
            for (std::size_t q = 0; q < w.queries.rows(); ++q) {
                const auto sel = retrieve(cache, w.queries.row(q), k, lut_mode(a));
                const auto err = output_error(sparse_attention(w.queries.row(q), sel, cache), exact[q]);
                cosine[v][h].push_back(err.cosine_sim);
                rel[v][h].push_back(err.rel_l2);
            }
        }
    });

    AttentionReport report;
    for (std::size_t v = 0; v < nv; ++v) {
        report.variants.push_back(summarize(config.ablations[v], cosine[v]));
        report.rel_l2_mean.push_back(summarize(config.ablations[v], rel[v]).mean);
    }
    report.wall_ms = elapsed_ms(start);
    return report;
}

std::vector<ReportRecord> AttentionReport::records(const BenchConfig& config) const {
    std::vector<ReportRecord> out;
    for (const auto& v : variants) {
        ReportRecord r = base_record(config, "attn", std::string(ablation_name(v.ablation)));
        r.cosine_mean = v.mean;
        r.cosine_std = v.std;
        r.wall_ms = wall_ms;
        out.push_back(std::move(r));
    }
    return out;
}

MicroReport run_micro_bench(const BenchConfig& config, const Workload* external, std::size_t repeats) {
    config.validate();
    const Workload w = workload_of(config, external, 0);
    const Ablation variant = config.ablations.front();
    const SelfIndexingCache cache = build_cache(config, variant, w);
    const Matrix kn = normalized_keys(w);
    const std::span<const float> q = w.queries.row(0);
    const LutMode mode = lut_mode(variant);

    MicroReport m;
    const auto lut_for = [&] {
        return mode == LutMode::centroid ? build_lut(q, cache.codebook())
                                         : build_sign_lut(q, cache.codes().groups());
    };
    score_tokens(lut_for(), cache.codes(), &m.lut_scoring);
    m.lut_ms = median_ms(repeats, [&] { score_tokens(lut_for(), cache.codes()); });
    dense_scores(q, kn, &m.dense_scoring);
    m.dense_ms = median_ms(repeats, [&] { dense_scores(q, kn); });

    build_codebook(kn, cache.codes(), &m.one_pass_build);
    m.one_pass_ms = median_ms(repeats, [&] { build_codebook(kn, encode_keys(kn)); });
    kmeans_codebook(kn, m.kmeans_iterations, config.seed, &m.kmeans_build);
    m.kmeans_ms = median_ms(std::min<std::size_t>(repeats, 3),
                            [&] { kmeans_codebook(kn, m.kmeans_iterations, config.seed); });

    const std::size_t k = config.token_budget().dynamic_k(cache.length(), cache.sink_positions().size());
    const TokenSelection sel = retrieve(cache, q, k, mode);
    m.selected = sel.indices.size();
    sparse_attention(q, sel, cache, &m.sparse_attention);
    m.sparse_ms = median_ms(repeats, [&] { sparse_attention(q, retrieve(cache, q, k, mode), cache); });
    m.full_ms = median_ms(repeats, [&] { exact_attention(q, kn, w.values); });
    return m;
}

std::vector<ReportRecord> MicroReport::records(const BenchConfig& config) const {
    const std::string variant(ablation_name(config.ablations.front()));
    const auto rec = [&](const char* bench, double ms, const OpCounts& ops) {
        ReportRecord r = base_record(config, bench, variant);
        r.wall_ms = ms;
        r.op_counts = ops;
        return r;
    };
    return {rec("micro_lut_scoring", lut_ms, lut_scoring),
            rec("micro_dense_scoring", dense_ms, dense_scoring),
            rec("micro_one_pass_build", one_pass_ms, one_pass_build),
            rec("micro_kmeans_build", kmeans_ms, kmeans_build),
            rec("micro_sparse_attention", sparse_ms, sparse_attention),
            rec("micro_full_attention", full_ms, OpCounts{})};
}

ReportRecord memory_record(const BenchConfig& config) {
    config.validate();
    const CacheConfig cc = config.cache_config(config.ablations.front());
    const MemoryReport m = memory_report(config.tokens, config.dim, cc,
                                         std::min(cc.sink_count, config.tokens), 0);
    ReportRecord r = base_record(config, "memory", std::string(ablation_name(config.ablations.front())));
    r.bits_per_token = m.bits_per_token();
    r.savings_fraction = m.savings_fraction;
    return r;
}

}  // namespace sikv::harness
