// One PASS/FAIL line per acceptance criterion; exit status 1 if any fails.
//
//   sikv_acceptance --recall-baseline tests/acceptance/recall_baseline.txt
//   sikv_acceptance --write-recall-baseline tests/acceptance/recall_baseline.txt

#include <CLI11.hpp>
#include <cfloat>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "oracles.hpp"
#include "sikv/attention.hpp"
#include "sikv/half.hpp"
#include "sikv/cache.hpp"
#include "sikv/harness/bench.hpp"
#include "sikv/harness/stats.hpp"
#include "sikv/harness/tensor_io.hpp"
#include "sikv/normalize.hpp"
#include "sikv/quantizer.hpp"
#include "sikv/retrieval.hpp"

using namespace sikv;
using namespace sikv::harness;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(double v, int precision = 6) {
    std::ostringstream s;
    s << std::setprecision(precision) << v;
    return s.str();
}

double rel_diff(std::span<const float> a, std::span<const float> b) {
    long double num = 0, den = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        num += (static_cast<long double>(a[i]) - b[i]) * (static_cast<long double>(a[i]) - b[i]);
        den += static_cast<long double>(b[i]) * b[i];
    }
    return den == 0 ? static_cast<double>(std::sqrt(num)) : static_cast<double>(std::sqrt(num / den));
}

Outcome memory_accounting() {
    const MemoryReport m = memory_report(4096, 128, CacheConfig{}, 0, 0);
    const bool per_token = m.variable_bits() == 896ull * 4096;
    // 1 - 896 / 4096 = 25 / 32
    const bool savings = m.variable_bits() * 32 == m.baseline_bits * 7 && m.savings_fraction == 0.78125;
    return {per_token && savings, "bits/token " + fmt(m.bits_per_token()) + ", savings " +
                                      fmt(m.savings_fraction) + ", ratio " +
                                      fmt(static_cast<double>(m.baseline_bits) / m.variable_bits(), 4)};
}

// Worst |lut - exact| / (|q| |k'|) over `queries` random queries.
double lut_error(const Matrix& kn, std::mt19937_64& rng, int queries) {
    const auto codes = encode_keys(kn);
    const Codebook cb = build_codebook(kn, codes);
    std::vector<double> norms(kn.rows());
    for (std::size_t i = 0; i < kn.rows(); ++i) norms[i] = std::sqrt(static_cast<double>(oracle::dot(kn.row(i), kn.row(i))));
    double worst = 0.0;
    for (int t = 0; t < queries; ++t) {
        const auto q = oracle::random_vector(rng, kn.cols());
        const double qn = std::sqrt(static_cast<double>(oracle::dot(q, q)));
        const auto s = score_tokens(build_lut(q, cb), codes);
        for (std::size_t i = 0; i < kn.rows(); ++i) {
            const double exact = static_cast<double>(oracle::dot(q, kn.row(i)));
            worst = std::max(worst, std::fabs(s[i] - exact) / (qn * norms[i]));
        }
    }
    return worst;
}

Outcome lut_exactness() {
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<float> mag(0.1f, 3.0f);
    constexpr std::size_t D = 128, G = D / 4;
    // every (group, code) holds exactly one token
    Matrix single(16, D);
    for (std::size_t g = 0; g < G; ++g) {
        std::vector<std::uint8_t> perm(16);
        std::iota(perm.begin(), perm.end(), 0);
        std::shuffle(perm.begin(), perm.end(), rng);
        for (std::size_t i = 0; i < 16; ++i) {
            const auto p = sign_pattern(perm[i]);
            for (std::size_t e = 0; e < 4; ++e) single(i, g * 4 + e) = p[e] * mag(rng);
        }
    }
    // every member of a cluster equals its centroid
    Matrix aligned(1024, D);
    std::vector<std::array<float, 4>> rep(G * 16);
    for (std::size_t g = 0; g < G; ++g) {
        for (std::uint8_t j = 0; j < 16; ++j) {
            const auto p = sign_pattern(j);
            for (std::size_t e = 0; e < 4; ++e) rep[g * 16 + j][e] = p[e] * mag(rng);
        }
    }
    std::uniform_int_distribution<std::size_t> code(0, 15);
    for (std::size_t i = 0; i < aligned.rows(); ++i) {
        for (std::size_t g = 0; g < G; ++g) {
            const auto& r = rep[g * 16 + code(rng)];
            for (std::size_t e = 0; e < 4; ++e) aligned(i, g * 4 + e) = r[e];
        }
    }
    const double e1 = lut_error(single, rng, 1000);
    const double e2 = lut_error(aligned, rng, 1000);
    return {e1 <= 1e-5 && e2 <= 1e-5,
            "max rel error L=16 singletons " + fmt(e1, 3) + ", L=1024 aligned " + fmt(e2, 3)};
}

Outcome shift_invariance() {
    std::mt19937_64 rng(3);
    double worst = 0.0;
    for (int t = 0; t < 100; ++t) {
        const std::size_t L = std::uniform_int_distribution<std::size_t>(1, 512)(rng);
        const Matrix k = oracle::random_matrix(rng, L, 128, 1.0, std::uniform_real_distribution<double>(-2, 2)(rng));
        const Matrix v = oracle::random_matrix(rng, L, 128);
        const auto q = oracle::random_vector(rng, 128);
        const Matrix kn = apply_normalization(k, compute_channel_stats(k));
        worst = std::max(worst, rel_diff(exact_attention(q, kn, v).out, exact_attention(q, k, v).out));
    }
    return {worst <= 1e-5, "max rel L2 " + fmt(worst, 3) + " over 100 instances"};
}

Outcome lossless_subset() {
    std::mt19937_64 rng(4);
    double worst = 0.0;
    for (int t = 0; t < 20; ++t) {
        WorkloadConfig wc;
        wc.tokens = 1024;
        wc.seed = 400 + t;
        wc.queries = 8;
        const Workload w = gen_synthetic(wc);
        CacheConfig cfg;
        cfg.quant.bits = QuantConfig::kPassThroughBits;
        const SelfIndexingCache cache = prefill(w.keys, w.values, w.window, cfg);
        for (std::size_t q = 0; q < w.queries.rows(); ++q) {
            const auto query = w.queries.row(q);
            const auto sel = retrieve(cache, query, wc.tokens - cfg.sink_count);
            if (sel.indices.size() != wc.tokens) return {false, "budget = L did not select every token"};
            worst = std::max(worst, rel_diff(sparse_attention(query, sel, cache).out,
                                             exact_attention(query, w.keys, w.values).out));
        }
    }
    return {worst <= 1e-5, "max rel L2 " + fmt(worst, 3) + " (16-bit, budget = L)"};
}

Outcome quant_error_bound() {
    std::mt19937_64 rng(5);
    constexpr double eps = FLT_EPSILON;
    constexpr int kBits[] = {1, 2, 4, 8};
    std::size_t groups = 0, degenerate = 0, violations = 0, inexact = 0;
    double worst_ratio = 0.0;
    while (groups < 10000) {
        const int bits = kBits[groups % 4];
        const double scale = std::pow(10.0, std::uniform_real_distribution<double>(-3, 3)(rng));
        Matrix x = oracle::random_matrix(rng, 25, 32, scale, scale * std::uniform_real_distribution<double>(-2, 2)(rng));
        // every fifth row is a constant group holding a half-representable value
        for (std::size_t i = 0; i < x.rows(); i += 5) {
            const float c = half::to_float(half::from_float(x(i, 0)));
            for (std::size_t j = 0; j < 32; ++j) x(i, j) = c;
        }
        const QuantizedTensor q = quantize_values(x, QuantConfig{bits, 32});
        const Matrix d = dequantize_values(q);
        for (std::size_t i = 0; i < x.rows(); ++i, ++groups) {
            const double qs = q.scale(i, 0);
            for (std::size_t j = 0; j < 32; ++j) {
                const double err = std::fabs(double(d(i, j)) - x(i, j));
                const double bound = qs / 2 * (1 + 4 * eps) + 4 * eps * std::fabs(x(i, j));
                if (err > bound) ++violations;
                if (qs > 0) worst_ratio = std::max(worst_ratio, err / (qs / 2));
            }
            if (i % 5 == 0) {
                ++degenerate;
                for (std::size_t j = 0; j < 32; ++j) inexact += d(i, j) != x(i, j);
            }
        }
    }
    return {violations == 0 && inexact == 0,
            std::to_string(groups) + " groups, " + std::to_string(violations) + " bound violations, max err/(qs/2) " +
                fmt(worst_ratio, 4) + ", " + std::to_string(degenerate) + " constant groups with " +
                std::to_string(inexact) + " inexact elements"};
}

Outcome roundtrips() {
    std::mt19937_64 rng(6);
    auto n = [&](std::size_t lo, std::size_t hi) { return std::uniform_int_distribution<std::size_t>(lo, hi)(rng); };
    std::size_t failures = 0;
    for (int t = 0; t < 1000; ++t) {
        const std::size_t rows = n(1, 20), groups = n(1, 33);
        const Matrix k = oracle::random_matrix(rng, rows, groups * 4);
        const SignCodeMatrix codes = encode_keys(k);
        const auto flat = codes.unpack();
        SignCodeMatrix rebuilt(rows, groups);
        for (std::size_t b = 0; b < rebuilt.packed_mut().size(); ++b) rebuilt.packed_mut()[b] = codes.packed()[b];
        bool ok = rebuilt.unpack() == flat;
        for (std::size_t i = 0; i < rows && ok; ++i) {
            for (std::size_t g = 0; g < groups; ++g) ok &= flat[i * groups + g] == oracle::sign_code(&k.row(i)[g * 4]);
        }
        failures += !ok;
    }
    for (int t = 0; t < 1000; ++t) {
        const int bits = 1 << (t % 4);
        std::vector<std::uint8_t> codes(n(0, 500));
        for (auto& c : codes) c = static_cast<std::uint8_t>(n(0, (1u << bits) - 1));
        failures += unpack_bits(pack_bits(codes, bits), codes.size(), bits) != codes;
    }
    const auto path = std::filesystem::temp_directory_path() / "sikv_acceptance_roundtrip.kvt";
    for (int t = 0; t < 1000; ++t) {
        io::Tensor tensor;
        const std::size_t ndims = n(0, 4);
        for (std::size_t d = 0; d < ndims; ++d) tensor.dims.push_back(n(1, 6));
        tensor.data = oracle::random_vector(rng, tensor.element_count(), 100.0);
        io::save_tensor(tensor, path);
        failures += !(io::load_tensor(path) == tensor);
        failures += io::read_file(path) != io::encode_tensor(tensor);
    }
    std::filesystem::remove(path);
    return {failures == 0, "3000 cases, " + std::to_string(failures) + " mismatches"};
}

Outcome entropy_direction() {
    std::size_t wins = 0;
    double raw_sum = 0.0, norm_sum = 0.0;
    constexpr std::size_t seeds = 50;
    for (std::size_t s = 0; s < seeds; ++s) {
        WorkloadConfig wc;
        wc.seed = s;
        wc.queries = 0;
        wc.window = 0;
        const Workload w = gen_synthetic(wc);
        const double raw = mean_sign_entropy(w.keys);
        const double norm = mean_sign_entropy(apply_normalization(w.keys, compute_channel_stats(w.keys)));
        wins += norm > raw;
        raw_sum += raw;
        norm_sum += norm;
    }
    return {wins * 100 >= 95 * seeds, std::to_string(wins) + "/" + std::to_string(seeds) +
                                          " seeds improve; mean entropy raw " + fmt(raw_sum / seeds, 4) +
                                          " -> normalized " + fmt(norm_sum / seeds, 4)};
}

Outcome ablation_direction() {
    BenchConfig c;
    c.sparsity = 0.075;
    c.heads = 100;
    c.seed = 1000;
    c.ablations = {Ablation::full, Ablation::no_sign_quant, Ablation::sign_only_retrieval};
    const AttentionReport r = run_attention_bench(c);
    const VariantSummary& full = *r.find(Ablation::full);
    bool pass = true;
    std::string detail = "full " + fmt(full.mean, 5);
    for (Ablation a : {Ablation::no_sign_quant, Ablation::sign_only_retrieval}) {
        const VariantSummary& v = *r.find(a);
        const PairedTest t = paired_t_test(full.per_head, v.per_head);
        pass = pass && full.mean >= v.mean && t.significant();
        detail += ", " + std::string(ablation_name(a)) + " " + fmt(v.mean, 5) + " (p " + fmt(t.p_value, 3) + ")";
    }
    return {pass, detail + " over 100 heads"};
}

struct RecallArgs {
    std::string baseline_path;
    std::string write_path;
};

Outcome recall_dominance(const RecallArgs& args) {
    BenchConfig c;
    c.sink_count = 0;
    c.budget = 160;
    c.heads = 50;
    const RecallReport r = run_recall_bench(c);
    const double recall = r.find(Ablation::full)->mean;
    const double random = 160.0 / 4096.0;
    bool pass = recall >= 10 * random;
    std::string detail = "recall@160 " + fmt(recall, 6) + " = " + fmt(recall / random, 4) + "x k/L; measured random " +
                         fmt(r.random_baseline.mean, 4);
    if (!args.write_path.empty()) {
        std::ofstream(args.write_path) << std::setprecision(17) << recall << '\n';
        detail += "; baseline written";
    } else if (!args.baseline_path.empty()) {
        std::ifstream in(args.baseline_path);
        double baseline = 0.0;
        if (!(in >> baseline)) return {false, detail + "; cannot read baseline " + args.baseline_path};
        pass = pass && std::fabs(recall - baseline) <= 0.005;
        detail += "; baseline " + fmt(baseline, 6);
    }
    return {pass, detail};
}

Outcome op_count_contracts() {
    BenchConfig c;
    c.sparsity = 0.075;
    const MicroReport m = run_micro_bench(c, nullptr, 1);
    const std::uint64_t L = c.tokens, G = c.dim / 4;
    const bool lut = m.lut_scoring.table_lookups == L * G && m.lut_scoring.multiplies == 0 &&
                     m.lut_scoring.adds == L * (G - 1);
    const bool build = m.one_pass_build.subvector_reads == L * G;
    const bool sparse = m.sparse_attention.dequantized_rows + m.sparse_attention.full_precision_rows == 2 * m.selected &&
                        m.selected < L;
    return {lut && build && sparse,
            "lookups " + std::to_string(m.lut_scoring.table_lookups) + " (L*G " + std::to_string(L * G) +
                "), multiplies " + std::to_string(m.lut_scoring.multiplies) + ", build reads " +
                std::to_string(m.one_pass_build.subvector_reads) + ", k-means scans " +
                std::to_string(m.kmeans_build.assignment_scans) + ", rows rebuilt " +
                std::to_string(m.sparse_attention.dequantized_rows + m.sparse_attention.full_precision_rows) +
                " for " + std::to_string(m.selected) + " selected"};
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Acceptance criteria"};
    RecallArgs recall;
    app.add_option("--recall-baseline", recall.baseline_path, "frozen recall@k to compare against");
    app.add_option("--write-recall-baseline", recall.write_path, "record the measured recall@k");
    CLI11_PARSE(app, argc, argv);

    struct Criterion {
        const char* name;
        double limit_s;
        std::function<Outcome()> run;
    };
    const std::vector<Criterion> criteria{
        {"memory accounting", 1, memory_accounting},
        {"LUT scoring exactness", 10, lut_exactness},
        {"softmax shift invariance", 5, shift_invariance},
        {"lossless subset consistency", 10, lossless_subset},
        {"quantization error bound", 5, quant_error_bound},
        {"roundtrip exactness", 5, roundtrips},
        {"entropy direction", 30, entropy_direction},
        {"ablation direction", 300, ablation_direction},
        {"recall dominance", 120, [&] { return recall_dominance(recall); }},
        {"operation-count contracts", 60, op_count_contracts},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const auto& c = criteria[i];
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (secs > c.limit_s) {
            o.pass = false;
            o.detail += "; over the " + fmt(c.limit_s) + " s limit";
        }
        failed += !o.pass;
        std::cout << (o.pass ? "PASS" : "FAIL") << ' ' << std::setw(2) << i + 1 << ' ' << c.name << ": " << o.detail
                  << " [" << std::fixed << std::setprecision(2) << secs << " s]" << std::defaultfloat << std::endl;
    }
    std::cout << (failed == 0 ? "all criteria passed" : std::to_string(failed) + " criteria failed") << std::endl;
    return failed == 0 ? 0 : 1;
}
