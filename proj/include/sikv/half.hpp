#pragma once

#include <cstdint>

// IEEE binary16 storage for quantization parameters. Values are carried as raw
// bit patterns so the containers stay trivially serializable.
namespace sikv::half {

inline constexpr float kMax = 65504.0f;

std::uint16_t from_float(float value);  // round to nearest even
float to_float(std::uint16_t bits);

/// Largest half not greater than `value`.
std::uint16_t round_down(float value);
/// Smallest half not less than `value`.
std::uint16_t round_up(float value);
/// Next representable half toward +infinity.
std::uint16_t next_up(std::uint16_t bits);

}  // namespace sikv::half
