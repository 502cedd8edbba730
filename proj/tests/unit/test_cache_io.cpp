#include <gtest/gtest.h>

#include "oracles.hpp"
#include "sikv/cache.hpp"
#include "sikv/harness/synthetic.hpp"

using namespace sikv;

namespace {

SelfIndexingCache sample_cache(int bits = 2, std::size_t dim = 32, std::size_t group = 32, std::uint64_t seed = 1) {
    std::mt19937_64 rng(seed);
    CacheConfig c;
    c.quant = QuantConfig{bits, group};
    c.sink_count = 5;
    auto cache = prefill(oracle::random_matrix(rng, 70, dim, 1.0, 0.5), oracle::random_matrix(rng, 70, dim),
                         oracle::random_matrix(rng, 4, dim), c);
    const auto kv = oracle::random_vector(rng, dim);
    cache.append_token(kv, kv);
    return cache;
}

}  // namespace

TEST(CacheIo, RoundtripIsByteExact) {
    for (int bits : {1, 2, 4, 8, 16}) {
        const auto cache = sample_cache(bits);
        const auto bytes = serialize_cache(cache);
        const auto back = deserialize_cache(bytes);
        EXPECT_EQ(serialize_cache(back), bytes) << "bits " << bits;
        EXPECT_EQ(memory_report(back), memory_report(cache));
        std::vector<float> a(32), b(32);
        for (std::size_t i = 0; i < cache.length(); ++i) {
            cache.key_row(i, a);
            back.key_row(i, b);
            EXPECT_EQ(a, b);
        }
    }
}

TEST(CacheIo, NarrowOneBitPayload) {
    const auto cache = sample_cache(1, 4, 4);
    const auto bytes = serialize_cache(cache);
    EXPECT_EQ(serialize_cache(deserialize_cache(bytes)), bytes);
}

TEST(CacheIo, SignedKeyEncodingRoundtrip) {
    std::mt19937_64 rng(3);
    CacheConfig c;
    c.key_encoding = KeyEncoding::signed_values;
    c.sink_count = 2;
    const auto cache = prefill(oracle::random_matrix(rng, 40, 32), oracle::random_matrix(rng, 40, 32), c);
    const auto bytes = serialize_cache(cache);
    EXPECT_EQ(deserialize_cache(bytes).config().key_encoding, KeyEncoding::signed_values);
}

TEST(CacheIo, PrefillIsDeterministic) {
    harness::WorkloadConfig wc;
    wc.seed = 42;
    const auto w1 = harness::gen_synthetic(wc);
    const auto w2 = harness::gen_synthetic(wc);
    CacheConfig c;
    EXPECT_EQ(serialize_cache(prefill(w1.keys, w1.values, w1.window, c)),
              serialize_cache(prefill(w2.keys, w2.values, w2.window, c)));
}

TEST(CacheIo, RejectsBadMagicAndVersion) {
    auto bytes = serialize_cache(sample_cache());
    auto bad = bytes;
    bad[0] = 'X';
    EXPECT_THROW(deserialize_cache(bad), FormatError);
    bad = bytes;
    bad[4] = 9;
    try {
        deserialize_cache(bad);
        FAIL() << "version accepted";
    } catch (const FormatError& e) {
        EXPECT_NE(std::string(e.what()).find("version"), std::string::npos);
    }
}

TEST(CacheIo, RejectsTruncationAndTrailingBytes) {
    const auto bytes = serialize_cache(sample_cache());
    for (std::size_t cut : {std::size_t{3}, std::size_t{40}, bytes.size() / 2, bytes.size() - 1}) {
        const std::vector<std::uint8_t> part(bytes.begin(), bytes.begin() + static_cast<std::ptrdiff_t>(cut));
        try {
            deserialize_cache(part);
            FAIL() << "accepted " << cut << " bytes";
        } catch (const FormatError& e) {
            EXPECT_NE(std::string(e.what()).find("offset"), std::string::npos) << e.what();
        }
    }
    auto longer = bytes;
    longer.push_back(0);
    EXPECT_THROW(deserialize_cache(longer), FormatError);
}

TEST(CacheIo, RejectsInconsistentFields) {
    auto bytes = serialize_cache(sample_cache());
    // bits byte sits right after the three u64 shape fields
    bytes[30] = 3;
    EXPECT_THROW(deserialize_cache(bytes), FormatError);
    bytes = serialize_cache(sample_cache());
    bytes[30 + 1 + 8 + 8 + 8] = 7;  // key encoding
    EXPECT_THROW(deserialize_cache(bytes), FormatError);
}
