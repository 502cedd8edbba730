#include "sikv/harness/synthetic.hpp"

#include <random>

namespace sikv::harness {

namespace {

// Independent streams per tensor so that changing the query count does not
// perturb the keys.
std::mt19937_64 stream(std::uint64_t seed, std::uint64_t tag) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(tag)};
    return std::mt19937_64(seq);
}

Matrix make_queries(const WorkloadConfig& c, const Workload& w, std::size_t count, std::uint64_t tag,
                    std::vector<std::size_t>* paired) {
    auto rng = stream(c.seed, tag);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_int_distribution<std::size_t> pick(0, c.tokens - 1);
    Matrix q(count, c.dim);
    for (std::size_t i = 0; i < count; ++i) {
        const bool correlated = unit(rng) < c.correlated_fraction;
        const std::size_t j = correlated ? pick(rng) : kUnpaired;
        for (std::size_t d = 0; d < c.dim; ++d) {
            const double noise = c.query_noise * w.channel_scale[d] * normal(rng);
            const double base = correlated ? w.keys(j, d) - w.channel_offset[d] : 0.0;
            const double x = correlated ? base + noise : w.channel_scale[d] * normal(rng);
            q(i, d) = static_cast<float>(c.query_scale * x);
        }
        if (paired) paired->push_back(j);
    }
    return q;
}

}  // namespace

Workload gen_synthetic(const WorkloadConfig& c) {
    if (c.tokens == 0 || c.dim == 0) throw ValidationError("gen_synthetic: tokens and dim must be positive");
    if (c.correlated_fraction < 0.0 || c.correlated_fraction > 1.0) {
        throw ValidationError("gen_synthetic: correlated fraction must lie in [0, 1]");
    }
    if (c.scale_spread < 0.0 || c.scale_spread >= 1.0) {
        throw ValidationError("gen_synthetic: scale spread must lie in [0, 1)");
    }
    Workload w;
    auto rng = stream(c.seed, 1);
    std::uniform_real_distribution<double> spread(1.0 - c.scale_spread, 1.0 + c.scale_spread);
    std::bernoulli_distribution coin(0.5);
    w.channel_scale.resize(c.dim);
    w.channel_offset.resize(c.dim);
    for (std::size_t d = 0; d < c.dim; ++d) {
        w.channel_scale[d] = static_cast<float>(spread(rng));
        const double sign = coin(rng) ? 1.0 : -1.0;
        w.channel_offset[d] = static_cast<float>(sign * c.offset_sigma * w.channel_scale[d]);
    }

    std::normal_distribution<double> normal(0.0, 1.0);
    w.keys = Matrix(c.tokens, c.dim);
    for (std::size_t i = 0; i < c.tokens; ++i) {
        for (std::size_t d = 0; d < c.dim; ++d) {
            w.keys(i, d) = static_cast<float>(w.channel_offset[d] + w.channel_scale[d] * normal(rng));
        }
    }

    auto vrng = stream(c.seed, 2);
    w.values = Matrix(c.tokens, c.dim);
    for (float& x : w.values.flat()) x = static_cast<float>(normal(vrng));

    w.queries = make_queries(c, w, c.queries, 3, &w.paired_key);
    w.window = make_queries(c, w, c.window, 4, nullptr);
    return w;
}

}  // namespace sikv::harness
