#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "sikv/codebook.hpp"
#include "sikv/common.hpp"
#include "sikv/normalize.hpp"
#include "sikv/op_counts.hpp"
#include "sikv/quantizer.hpp"
#include "sikv/retrieval.hpp"

namespace sikv {

/// How the key payload next to the sign plane is stored.
enum class KeyEncoding : std::uint8_t {
    sign_magnitude = 0,  // B-bit |K'|/alpha, sign restored from the sign codes
    signed_values = 1,   // B-bit signed K', sign codes used for retrieval only
};

/// Which lookup table drives compressed-domain retrieval.
enum class LutMode : std::uint8_t {
    centroid = 0,      // query . sign-cluster centroids
    sign_pattern = 1,  // query . {-1,+1} sign patterns
};

struct CacheConfig {
    QuantConfig quant;
    std::size_t sink_count = 64;
    std::size_t pool_width = 7;  // max-pool width used when scoring sink candidates
    KeyEncoding key_encoding = KeyEncoding::sign_magnitude;

    bool operator==(const CacheConfig&) const = default;
};

/// Compressed key/value cache of one attention head.
///
/// Positions [0, prefill_length) are the prefill tokens: their keys live as
/// sign codes plus a quantized payload, their values as quantized rows, and a
/// subset (the sinks) is also kept at full precision. Positions
/// [prefill_length, length) are decode-stage tokens kept at full precision.
/// All keys are stored in the mean-normalized space K' = K - mu; mu is frozen
/// at prefill.
///
/// Single writer (prefill, append_token), many readers. Every read path is const.
class SelfIndexingCache {
public:
    const CacheConfig& config() const noexcept { return config_; }
    std::size_t dim() const noexcept { return norm_.dim(); }
    std::size_t prefill_length() const noexcept { return codes_.tokens(); }
    std::size_t recent_count() const noexcept { return dim() == 0 ? 0 : recent_keys_.size() / dim(); }
    std::size_t length() const noexcept { return prefill_length() + recent_count(); }

    const NormalizationState& norm() const noexcept { return norm_; }
    const SignCodeMatrix& codes() const noexcept { return codes_; }
    const Codebook& codebook() const noexcept { return codebook_; }
    const QuantizedTensor& key_payload() const noexcept { return key_payload_; }
    const QuantizedTensor& value_payload() const noexcept { return values_; }

    std::span<const std::size_t> sink_positions() const noexcept { return sink_positions_; }
    const Matrix& sink_keys() const noexcept { return sink_keys_; }
    const Matrix& sink_values() const noexcept { return sink_values_; }
    std::vector<std::size_t> recent_positions() const;
    bool is_sink(std::size_t position) const noexcept {
        return position < sink_slot_.size() && sink_slot_[position] >= 0;
    }

    /// Stores (k - mu, v) at full precision as the next position. Nothing else changes.
    void append_token(std::span<const float> key, std::span<const float> value);

    /// Key K' of one position: full precision for sink and recent tokens,
    /// reconstructed from the quantized planes otherwise.
    void key_row(std::size_t position, std::span<float> out, OpCounts* ops = nullptr) const;
    void value_row(std::size_t position, std::span<float> out, OpCounts* ops = nullptr) const;

private:
    friend SelfIndexingCache assemble_cache(CacheConfig, NormalizationState, SignCodeMatrix,
                                            Codebook, QuantizedTensor, QuantizedTensor,
                                            std::vector<std::size_t>, Matrix, Matrix);
    friend std::vector<std::uint8_t> serialize_cache(const SelfIndexingCache&);
    friend SelfIndexingCache deserialize_cache(std::span<const std::uint8_t>);

    void check_position(std::size_t position, std::span<float> out) const;

    CacheConfig config_;
    NormalizationState norm_;
    SignCodeMatrix codes_;
    Codebook codebook_;
    QuantizedTensor key_payload_;
    QuantizedTensor values_;
    std::vector<std::size_t> sink_positions_;  // ascending
    std::vector<std::int32_t> sink_slot_;      // prefill position -> sink row, or -1
    Matrix sink_keys_;
    Matrix sink_values_;
    std::vector<float> recent_keys_;
    std::vector<float> recent_values_;
};

/// Validates and wires already-built parts into a cache (used by prefill and
/// by deserialization).
SelfIndexingCache assemble_cache(CacheConfig config, NormalizationState norm, SignCodeMatrix codes,
                                 Codebook codebook, QuantizedTensor key_payload,
                                 QuantizedTensor values, std::vector<std::size_t> sink_positions,
                                 Matrix sink_keys, Matrix sink_values);

/// Observation-window sink selection: sums each key's softmax attention weight
/// over the window queries, smooths the sums with a centred 1-D max-pool of
/// width `pool_width` over positions, and returns the `count` best positions
/// in ascending order. Ties on the pooled score go to the larger raw mass,
/// then to the lower index.
std::vector<std::size_t> select_sink_tokens(const Matrix& normalized_keys, const Matrix& window,
                                            std::size_t count, std::size_t pool_width = 7);

/// Prefill pipeline: channel stats, normalization, sign codes, one-pass
/// codebook, key payload, value quantization, then sink selection. Without a
/// window the sinks are the first `sink_count` positions.
SelfIndexingCache prefill(const Matrix& keys, const Matrix& values, const CacheConfig& config);
SelfIndexingCache prefill(const Matrix& keys, const Matrix& values, const Matrix& window,
                          const CacheConfig& config);

/// Compressed-domain retrieval for one query: LUT scores over the prefill
/// tokens, then sink ∪ recent ∪ top-k.
TokenSelection retrieve(const SelfIndexingCache& cache, std::span<const float> query, std::size_t k,
                        LutMode mode = LutMode::centroid, OpCounts* ops = nullptr);

/// Bit accounting of a cache. Variable cost covers the prefill tokens' sign
/// codes, payloads and parameters; fixed cost covers the codebook, mu/alpha and
/// the sink rows with their positions; recent tokens are counted separately.
/// Full-precision storage is counted at 32 bits per element.
struct MemoryReport {
    std::uint64_t tokens = 0;
    std::uint64_t sign_bits = 0;
    std::uint64_t payload_bits = 0;
    std::uint64_t param_bits = 0;
    std::uint64_t fixed_bits = 0;
    std::uint64_t recent_bits = 0;
    std::uint64_t total_bits = 0;
    std::uint64_t baseline_bits = 0;  // 16-bit K and V for the prefill tokens
    double savings_fraction = 0.0;    // 1 - variable / baseline

    std::uint64_t variable_bits() const noexcept { return sign_bits + payload_bits + param_bits; }
    /// Variable bits per token; exact whenever tokens > 0.
    double bits_per_token() const noexcept {
        return tokens == 0 ? 0.0 : static_cast<double>(variable_bits()) / static_cast<double>(tokens);
    }
    bool operator==(const MemoryReport&) const = default;
};

inline constexpr std::uint64_t kWorkingPrecisionBits = 32;

MemoryReport memory_report(const SelfIndexingCache& cache);
/// The same accounting from shapes alone: `tokens` prefill tokens of width
/// `dim`, `sinks` full-precision sink rows and `recent` decode tokens.
MemoryReport memory_report(std::size_t tokens, std::size_t dim, const CacheConfig& config,
                           std::size_t sinks, std::size_t recent);

/// Byte-exact little-endian container ("SIKV", version 1) holding every field
/// of the cache. Identical caches serialize to identical bytes.
std::vector<std::uint8_t> serialize_cache(const SelfIndexingCache& cache);
SelfIndexingCache deserialize_cache(std::span<const std::uint8_t> bytes);

}  // namespace sikv
