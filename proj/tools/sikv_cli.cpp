// sikv: synthetic workloads, cache construction and benchmark reports.
//
//   sikv gen     --tokens 4096 --dim 128 --seed 1 --out data/
//   sikv prefill --input-k data/keys.kvt --input-v data/values.kvt --out head.sikv
//   sikv recall  --sink 0 --budget 160 --heads 50 --check
//   sikv attn    --sparsity 0.075 --ablation all --heads 100
//   sikv micro   --sparsity 0.075
//   sikv memory
//
// Reports go to stdout (or --out) as JSON lines.

#include <CLI11.hpp>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include "sikv/harness/bench.hpp"
#include "sikv/harness/stats.hpp"
#include "sikv/harness/tensor_io.hpp"

namespace fs = std::filesystem;
using namespace sikv;
using namespace sikv::harness;

namespace {

struct Options {
    BenchConfig bench;
    std::optional<std::size_t> budget;
    std::optional<double> sparsity;
    std::string ablation = "full";
    std::string input_k, input_v, input_q, input_w;
    std::string out;
    bool check = false;
    bool no_window = false;
    std::size_t repeats = 5;
};

void add_shared(CLI::App* cmd, Options& o) {
    cmd->add_option("--tokens", o.bench.tokens, "prefill length L")->capture_default_str();
    cmd->add_option("--dim", o.bench.dim, "head dimension D")->capture_default_str();
    cmd->add_option("--bits", o.bench.bits, "payload bits (1, 2, 4, 8; 16 = lossless)")->capture_default_str();
    cmd->add_option("--group-size", o.bench.group_size, "quantization group size")->capture_default_str();
    auto* budget = cmd->add_option("--budget", o.budget, "total tokens attended per query");
    auto* sparsity = cmd->add_option("--sparsity", o.sparsity, "fraction of the cache attended (default 0.075)");
    budget->excludes(sparsity);
    cmd->add_option("--sink", o.bench.sink_count, "sink tokens per head")->capture_default_str();
    cmd->add_option("--seed", o.bench.seed, "workload seed")->capture_default_str();
    cmd->add_option("--ablation", o.ablation, "full, no_sign_quant, sign_only_retrieval, no_sink or all")
        ->capture_default_str();
    cmd->add_option("--queries", o.bench.queries, "queries per head")->capture_default_str();
    cmd->add_option("--heads", o.bench.heads, "independent synthetic heads (seeds seed..seed+heads-1)")
        ->capture_default_str();
    cmd->add_option("--offset-sigma", o.bench.workload.offset_sigma, "channel offset in channel stds")
        ->capture_default_str();
    cmd->add_option("--correlated", o.bench.workload.correlated_fraction, "fraction of correlated queries")
        ->capture_default_str();
    cmd->add_option("--query-scale", o.bench.workload.query_scale, "query magnitude (attention sharpness)")
        ->capture_default_str();
    cmd->add_flag("--no-window", o.no_window, "sinks are the first positions instead of window-scored");
    cmd->add_option("--input-k", o.input_k, "keys tensor file (L x D)");
    cmd->add_option("--input-v", o.input_v, "values tensor file (L x D)");
    cmd->add_option("--input-q", o.input_q, "queries tensor file (Q x D)");
    cmd->add_option("--input-w", o.input_w, "observation-window queries (W x D)");
    cmd->add_option("--out", o.out, "output path");
    cmd->add_flag("--check", o.check, "exit nonzero when the run's acceptance check fails");
}

void finalize(Options& o) {
    o.bench.budget = o.budget;
    o.bench.sparsity = o.sparsity;
    if (!o.budget && !o.sparsity) o.bench.sparsity = 0.075;
    o.bench.ablations = o.ablation == "all" ? all_ablations() : std::vector<Ablation>{parse_ablation(o.ablation)};
    o.bench.use_window = !o.no_window;
}

std::optional<Workload> load_inputs(Options& o) {
    if (o.input_k.empty() && o.input_v.empty() && o.input_q.empty()) return std::nullopt;
    if (o.input_k.empty() || o.input_v.empty()) throw ValidationError("--input-k and --input-v go together");
    Workload w;
    w.keys = io::to_matrix(io::load_tensor(o.input_k));
    w.values = io::to_matrix(io::load_tensor(o.input_v));
    if (!o.input_q.empty()) w.queries = io::to_matrix(io::load_tensor(o.input_q));
    if (!o.input_w.empty()) w.window = io::to_matrix(io::load_tensor(o.input_w));
    w.paired_key.assign(w.queries.rows(), kUnpaired);
    o.bench.tokens = w.keys.rows();
    o.bench.dim = w.keys.cols();
    o.bench.queries = std::max<std::size_t>(1, w.queries.rows());
    o.bench.heads = 1;
    return w;
}

std::ostream& output(const Options& o, std::ofstream& file) {
    if (o.out.empty()) return std::cout;
    file.open(o.out, std::ios::trunc);
    if (!file) throw FormatError("cannot write " + o.out);
    return file;
}

bool report_check(bool ok, const std::string& what) {
    std::cerr << (ok ? "check ok: " : "check FAILED: ") << what << '\n';
    return ok;
}

int cmd_gen(Options& o) {
    finalize(o);
    const Workload w = gen_synthetic(o.bench.workload_for(0));
    const fs::path dir = o.out.empty() ? fs::path(".") : fs::path(o.out);
    fs::create_directories(dir);
    io::save_tensor(io::to_tensor(w.keys), dir / "keys.kvt");
    io::save_tensor(io::to_tensor(w.values), dir / "values.kvt");
    io::save_tensor(io::to_tensor(w.queries), dir / "queries.kvt");
    io::save_tensor(io::to_tensor(w.window), dir / "window.kvt");
    std::cerr << "wrote keys/values/queries/window to " << dir.string() << '\n';
    return 0;
}

int cmd_prefill(Options& o) {
    finalize(o);
    auto external = load_inputs(o);
    const Workload w = external ? *external : gen_synthetic(o.bench.workload_for(0));
    o.bench.validate();
    const SelfIndexingCache cache = build_cache(o.bench, o.bench.ablations.front(), w);
    if (!o.out.empty()) io::write_file(o.out, serialize_cache(cache));
    ReportRecord r = memory_record(o.bench);
    const MemoryReport m = memory_report(cache);
    r.bench = "prefill";
    r.bits_per_token = m.bits_per_token();
    r.savings_fraction = m.savings_fraction;
    std::cout << to_json_line(r) << '\n';
    if (o.check) {
        const auto bytes = serialize_cache(cache);
        return report_check(serialize_cache(deserialize_cache(bytes)) == bytes, "cache serialization roundtrip")
                   ? 0
                   : 1;
    }
    return 0;
}

int cmd_recall(Options& o) {
    finalize(o);
    auto external = load_inputs(o);
    const RecallReport rep = run_recall_bench(o.bench, external ? &*external : nullptr);
    for (const auto& w : rep.warnings) std::cerr << "warning: " << w << '\n';
    std::ofstream file;
    const auto records = rep.records(o.bench);
    write_jsonl(output(o, file), records);
    if (!o.check) return 0;
    bool ok = true;
    for (const auto& v : rep.variants) {
        ok &= report_check(v.mean >= 10.0 * rep.expected_random,
                           std::string(ablation_name(v.ablation)) + " recall " + std::to_string(v.mean) +
                               " >= 10 x random " + std::to_string(rep.expected_random));
    }
    return ok ? 0 : 1;
}

int cmd_attn(Options& o) {
    finalize(o);
    auto external = load_inputs(o);
    const AttentionReport rep = run_attention_bench(o.bench, external ? &*external : nullptr);
    std::ofstream file;
    write_jsonl(output(o, file), rep.records(o.bench));
    if (!o.check) return 0;
    const VariantSummary* full = rep.find(Ablation::full);
    if (full == nullptr) return report_check(false, "--check needs the full variant") ? 0 : 1;
    bool ok = true;
    for (const auto& v : rep.variants) {
        if (v.ablation == Ablation::full || v.ablation == Ablation::no_sink) continue;
        std::string what = "full cosine " + std::to_string(full->mean) + " >= " +
                           std::string(ablation_name(v.ablation)) + " " + std::to_string(v.mean);
        bool pass = full->mean >= v.mean;
        if (full->per_head.size() >= 2) {
            const PairedTest t = paired_t_test(full->per_head, v.per_head);
            what += " (paired p = " + std::to_string(t.p_value) + ")";
            pass = pass && t.significant();
        }
        ok &= report_check(pass, what);
    }
    return ok ? 0 : 1;
}

int cmd_micro(Options& o) {
    finalize(o);
    auto external = load_inputs(o);
    const MicroReport m = run_micro_bench(o.bench, external ? &*external : nullptr, o.repeats);
    std::ofstream file;
    write_jsonl(output(o, file), m.records(o.bench));
    if (!o.check) return 0;
    const std::uint64_t L = o.bench.tokens;
    const std::uint64_t G = o.bench.dim / kSubvectorDim;
    bool ok = report_check(m.lut_scoring.table_lookups == L * G && m.lut_scoring.multiplies == 0,
                           "LUT scoring: L*G lookups, no multiplies");
    ok &= report_check(m.one_pass_build.subvector_reads == L * G, "one-pass build reads each subvector once");
    ok &= report_check(m.kmeans_build.assignment_scans >= 20 * m.one_pass_build.subvector_reads,
                       "k-means does >= 20x the assignment work");
    ok &= report_check(m.sparse_attention.dequantized_rows + m.sparse_attention.full_precision_rows ==
                           2 * m.selected,
                       "sparse attention reconstructs only selected rows");
    return ok ? 0 : 1;
}

int cmd_memory(Options& o) {
    finalize(o);
    const ReportRecord r = memory_record(o.bench);
    std::ofstream file;
    output(o, file) << to_json_line(r) << '\n';
    if (!o.check) return 0;
    const MemoryReport m = memory_report(o.bench.tokens, o.bench.dim, o.bench.cache_config(Ablation::full),
                                         0, 0);
    return report_check(m.variable_bits() * m.baseline_bits != 0 &&
                            m.savings_fraction == 1.0 - static_cast<double>(m.variable_bits()) /
                                                            static_cast<double>(m.baseline_bits),
                        "savings = 1 - variable / baseline")
               ? 0
               : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Self-indexing KV cache: workloads, prefill and benchmarks"};
    app.require_subcommand(1);
    Options o;
    struct Verb {
        const char* name;
        const char* help;
        int (*run)(Options&);
    };
    const Verb verbs[] = {
        {"gen", "write a synthetic workload as tensor files into --out", cmd_gen},
        {"prefill", "build a cache and optionally serialize it to --out", cmd_prefill},
        {"recall", "recall@k of compressed-domain retrieval against exact top-k", cmd_recall},
        {"attn", "sparse attention output error per ablation variant", cmd_attn},
        {"micro", "operation counts and host wall-clock of the kernels", cmd_micro},
        {"memory", "bit accounting of the configured cache", cmd_memory},
    };
    std::vector<std::pair<CLI::App*, int (*)(Options&)>> commands;
    for (const auto& v : verbs) {
        CLI::App* cmd = app.add_subcommand(v.name, v.help);
        add_shared(cmd, o);
        if (std::string(v.name) == "micro") {
            cmd->add_option("--repeats", o.repeats, "timing repeats (median reported)")->capture_default_str();
        }
        commands.emplace_back(cmd, v.run);
    }
    CLI11_PARSE(app, argc, argv);

    try {
        for (auto& [cmd, run] : commands) {
            if (cmd->parsed()) return run(o);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
