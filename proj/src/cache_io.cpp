// "SIKV" cache container, version 1. All integers little-endian.
//
//   magic "SIKV" | u16 version | u64 dim | u64 prefill tokens | u64 recent tokens
//   config:  u8 bits | u64 group_size | u64 sink_count | u64 pool_width | u8 key_encoding
//   norm:    f32[dim] mu | f32[dim] alpha
//   codes:   u8[tokens * ceil(dim/8)]
//   codebook f32[groups*16*4] centroids | u64[groups*16] cluster sizes
//   payload  (keys, then values) u8[...] codes | u16[...] scales | u16[...] zeros | f32[...] raw
//   sinks:   u64 count | u64[count] positions | f32[count*dim] keys | f32[count*dim] values
//   recent:  f32[recent*dim] keys | f32[recent*dim] values

#include <algorithm>
#include <array>

#include "sikv/cache.hpp"
#include "sikv/detail/bytes.hpp"

namespace sikv {

namespace {

constexpr std::array<std::uint8_t, 4> kMagic = {'S', 'I', 'K', 'V'};
constexpr std::uint16_t kVersion = 1;

void write_payload(detail::ByteWriter& w, const QuantizedTensor& q) {
    w.put_bytes(q.packed());
    w.put_all(q.scale_bits());
    w.put_all(q.zero_bits());
    w.put_all(q.raw());
}

QuantizedTensor read_payload(detail::ByteReader& r, std::size_t rows, std::size_t cols,
                             const QuantConfig& config) {
    QuantizedTensor q(rows, cols, config);
    r.require(q.packed().size(), "payload codes");
    auto codes = r.get_bytes(q.packed().size(), "payload codes");
    std::ranges::copy(codes, q.packed_mut().begin());
    auto scales = r.get_all<std::uint16_t>(q.scale_bits().size(), "payload scales");
    std::ranges::copy(scales, q.scale_bits_mut().begin());
    auto zeros = r.get_all<std::uint16_t>(q.zero_bits().size(), "payload zeros");
    std::ranges::copy(zeros, q.zero_bits_mut().begin());
    auto raw = r.get_all<float>(q.raw().size(), "payload raw");
    std::ranges::copy(raw, q.raw_mut().begin());
    return q;
}

}  // namespace

std::vector<std::uint8_t> serialize_cache(const SelfIndexingCache& cache) {
    detail::ByteWriter w;
    w.put_bytes(kMagic);
    w.put(kVersion);
    w.put<std::uint64_t>(cache.dim());
    w.put<std::uint64_t>(cache.prefill_length());
    w.put<std::uint64_t>(cache.recent_count());

    const CacheConfig& cfg = cache.config_;
    w.put<std::uint8_t>(static_cast<std::uint8_t>(cfg.quant.bits));
    w.put<std::uint64_t>(cfg.quant.group_size);
    w.put<std::uint64_t>(cfg.sink_count);
    w.put<std::uint64_t>(cfg.pool_width);
    w.put<std::uint8_t>(static_cast<std::uint8_t>(cfg.key_encoding));

    w.put_all(std::span<const float>(cache.norm_.mu));
    w.put_all(std::span<const float>(cache.norm_.alpha));
    w.put_bytes(cache.codes_.packed());
    w.put_all(cache.codebook_.data());
    w.put_all(cache.codebook_.sizes());
    write_payload(w, cache.key_payload_);
    write_payload(w, cache.values_);

    w.put<std::uint64_t>(cache.sink_positions_.size());
    for (std::size_t p : cache.sink_positions_) w.put<std::uint64_t>(p);
    w.put_all(cache.sink_keys_.flat());
    w.put_all(cache.sink_values_.flat());
    w.put_all(std::span<const float>(cache.recent_keys_));
    w.put_all(std::span<const float>(cache.recent_values_));
    return std::move(w.bytes());
}

SelfIndexingCache deserialize_cache(std::span<const std::uint8_t> bytes) {
    detail::ByteReader r(bytes);
    const auto magic = r.get_bytes(4, "cache magic");
    if (!std::equal(magic.begin(), magic.end(), kMagic.begin())) {
        throw FormatError("cache: bad magic at byte offset 0");
    }
    const auto version = r.get<std::uint16_t>("cache version");
    if (version != kVersion) {
        throw FormatError("cache: unsupported version " + std::to_string(version) + " at byte offset 4");
    }
    const auto dim = r.get<std::uint64_t>("cache dim");
    const auto tokens = r.get<std::uint64_t>("cache tokens");
    const auto recent = r.get<std::uint64_t>("cache recent");

    CacheConfig cfg;
    cfg.quant.bits = r.get<std::uint8_t>("cache bits");
    cfg.quant.group_size = r.get<std::uint64_t>("cache group size");
    cfg.sink_count = r.get<std::uint64_t>("cache sink count");
    cfg.pool_width = r.get<std::uint64_t>("cache pool width");
    const auto encoding = r.get<std::uint8_t>("cache key encoding");
    if (encoding > 1) {
        throw FormatError("cache: unknown key encoding " + std::to_string(encoding) + " at byte offset " +
                          std::to_string(r.offset() - 1));
    }
    cfg.key_encoding = static_cast<KeyEncoding>(encoding);
    if (dim == 0 || dim % kSubvectorDim != 0) throw FormatError("cache: invalid dimension " + std::to_string(dim));
    try {
        cfg.quant.validate(dim);
    } catch (const std::invalid_argument& e) {
        throw FormatError(std::string("cache: ") + e.what());
    }

    NormalizationState norm;
    norm.mu = r.get_all<float>(dim, "cache mu");
    norm.alpha = r.get_all<float>(dim, "cache alpha");

    const std::size_t groups = dim / kSubvectorDim;
    const std::size_t code_bytes = (groups + 1) / 2;
    r.require_count(tokens, code_bytes, "cache sign codes");
    SignCodeMatrix codes =
        SignCodeMatrix::from_packed(tokens, groups, r.get_bytes(tokens * code_bytes, "cache sign codes"));

    Codebook codebook(groups);
    auto centroids = r.get_all<float>(codebook.data().size(), "cache codebook");
    std::ranges::copy(centroids, codebook.data_mut().begin());
    auto sizes = r.get_all<std::uint64_t>(codebook.sizes().size(), "cache cluster sizes");
    std::ranges::copy(sizes, codebook.sizes_mut().begin());

    r.require_count(tokens, (dim + 7) / 8, "cache payload");
    QuantizedTensor key_payload = read_payload(r, tokens, dim, cfg.quant);
    QuantizedTensor values = read_payload(r, tokens, dim, cfg.quant);

    const auto sink_count = r.get<std::uint64_t>("cache sink count");
    std::vector<std::size_t> positions;
    for (auto p : r.get_all<std::uint64_t>(sink_count, "cache sink positions")) positions.push_back(p);
    r.require_count(sink_count, dim * sizeof(float), "cache sink rows");
    Matrix sink_keys(sink_count, dim, r.get_all<float>(sink_count * dim, "cache sink keys"));
    Matrix sink_values(sink_count, dim, r.get_all<float>(sink_count * dim, "cache sink values"));
    r.require_count(recent, 2 * dim * sizeof(float), "cache recent rows");
    auto recent_keys = r.get_all<float>(recent * dim, "cache recent keys");
    auto recent_values = r.get_all<float>(recent * dim, "cache recent values");
    if (r.remaining() != 0) {
        throw FormatError("cache: " + std::to_string(r.remaining()) + " trailing bytes at byte offset " +
                          std::to_string(r.offset()));
    }

    SelfIndexingCache cache;
    try {
        cache = assemble_cache(cfg, std::move(norm), std::move(codes), std::move(codebook),
                               std::move(key_payload), std::move(values), std::move(positions),
                               std::move(sink_keys), std::move(sink_values));
    } catch (const std::invalid_argument& e) {
        throw FormatError(std::string("cache: ") + e.what());
    }
    cache.recent_keys_ = std::move(recent_keys);
    cache.recent_values_ = std::move(recent_values);
    return cache;
}

}  // namespace sikv
