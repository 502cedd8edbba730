#include "sikv/harness/report.hpp"

#include <json.hpp>

namespace sikv::harness {

namespace {

using nlohmann::ordered_json;

ordered_json optional_number(const std::optional<double>& v) {
    return v ? ordered_json(*v) : ordered_json(nullptr);
}

ordered_json counts_json(const OpCounts& c) {
    return ordered_json{{"table_lookups", c.table_lookups},       {"adds", c.adds},
                        {"multiplies", c.multiplies},             {"subvector_reads", c.subvector_reads},
                        {"assignment_scans", c.assignment_scans}, {"distance_evals", c.distance_evals},
                        {"dequantized_rows", c.dequantized_rows}, {"full_precision_rows", c.full_precision_rows}};
}

ordered_json budget_json(const std::optional<TokenBudget>& b) {
    if (!b) return nullptr;
    if (const auto* n = std::get_if<std::size_t>(&b->value)) return ordered_json{{"tokens", *n}};
    return ordered_json{{"fraction", std::get<double>(b->value)}};
}

}  // namespace

std::string to_json_line(const ReportRecord& r) {
    ordered_json j;
    j["bench"] = r.bench;
    j["seed"] = r.seed;
    j["L"] = r.L;
    j["D"] = r.D;
    j["bits"] = r.bits;
    j["budget"] = budget_json(r.budget);
    j["ablation"] = r.ablation;
    j["recall_at_k"] = optional_number(r.recall_at_k);
    j["cosine_mean"] = optional_number(r.cosine_mean);
    j["cosine_std"] = optional_number(r.cosine_std);
    j["bits_per_token"] = optional_number(r.bits_per_token);
    j["savings_fraction"] = optional_number(r.savings_fraction);
    j["wall_ms"] = optional_number(r.wall_ms);
    j["op_counts"] = r.op_counts ? counts_json(*r.op_counts) : ordered_json(nullptr);
    return j.dump();
}

void write_jsonl(std::ostream& out, std::span<const ReportRecord> records) {
    for (const auto& r : records) out << to_json_line(r) << '\n';
}

}  // namespace sikv::harness
