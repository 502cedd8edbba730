#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <span>
#include <string>
#include <type_traits>
#include <vector>

#include "sikv/common.hpp"

// Little-endian byte stream helpers for the on-disk formats.
namespace sikv::detail {

class ByteWriter {
public:
    template <class T>
        requires std::is_arithmetic_v<T>
    void put(T value) {
        using U = std::conditional_t<sizeof(T) == 1, std::uint8_t,
                  std::conditional_t<sizeof(T) == 2, std::uint16_t,
                  std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint64_t>>>;
        const U bits = std::bit_cast<U>(value);
        for (std::size_t i = 0; i < sizeof(T); ++i) {
            bytes_.push_back(static_cast<std::uint8_t>(bits >> (8 * i)));
        }
    }

    template <class T>
    void put_all(std::span<const T> values) {
        for (const T& v : values) put(v);
    }

    void put_bytes(std::span<const std::uint8_t> raw) { bytes_.insert(bytes_.end(), raw.begin(), raw.end()); }

    std::vector<std::uint8_t>& bytes() noexcept { return bytes_; }

private:
    std::vector<std::uint8_t> bytes_;
};

class ByteReader {
public:
    explicit ByteReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

    template <class T>
        requires std::is_arithmetic_v<T>
    T get(const char* what) {
        using U = std::conditional_t<sizeof(T) == 1, std::uint8_t,
                  std::conditional_t<sizeof(T) == 2, std::uint16_t,
                  std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint64_t>>>;
        require(sizeof(T), what);
        U bits = 0;
        for (std::size_t i = 0; i < sizeof(T); ++i) bits |= static_cast<U>(static_cast<U>(bytes_[pos_ + i]) << (8 * i));
        pos_ += sizeof(T);
        return std::bit_cast<T>(bits);
    }

    template <class T>
    std::vector<T> get_all(std::size_t count, const char* what) {
        require_count(count, sizeof(T), what);
        std::vector<T> out(count);
        for (auto& v : out) v = get<T>(what);
        return out;
    }

    std::vector<std::uint8_t> get_bytes(std::size_t count, const char* what) {
        require(count, what);
        std::vector<std::uint8_t> out(bytes_.begin() + static_cast<std::ptrdiff_t>(pos_),
                                      bytes_.begin() + static_cast<std::ptrdiff_t>(pos_ + count));
        pos_ += count;
        return out;
    }

    std::size_t offset() const noexcept { return pos_; }
    std::size_t remaining() const noexcept { return bytes_.size() - pos_; }

    void require(std::size_t count, const char* what) const {
        if (count > remaining()) {
            throw FormatError(std::string(what) + ": truncated at byte offset " + std::to_string(pos_) +
                              ", expected " + std::to_string(count) + " more bytes, " +
                              std::to_string(remaining()) + " available");
        }
    }

    void require_count(std::size_t count, std::size_t elem_size, const char* what) const {
        if (elem_size != 0 && count > remaining() / elem_size) {
            throw FormatError(std::string(what) + ": truncated at byte offset " + std::to_string(pos_) +
                              ", expected " + std::to_string(count) + " elements of " +
                              std::to_string(elem_size) + " bytes, " + std::to_string(remaining()) +
                              " bytes available");
        }
    }

private:
    std::span<const std::uint8_t> bytes_;
    std::size_t pos_ = 0;
};

}  // namespace sikv::detail
