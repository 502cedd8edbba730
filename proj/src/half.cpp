#include "sikv/half.hpp"

#include <Eigen/Core>

namespace sikv::half {

std::uint16_t from_float(float value) {
    return Eigen::numext::bit_cast<std::uint16_t>(Eigen::half(value));
}

float to_float(std::uint16_t bits) {
    return static_cast<float>(Eigen::numext::bit_cast<Eigen::half>(bits));
}

std::uint16_t next_up(std::uint16_t bits) {
    constexpr std::uint16_t kSign = 0x8000;
    if (bits == kSign) return 0x0001;             // -0 -> smallest positive subnormal
    if (bits & kSign) return bits - 1;            // negative: shrink magnitude
    return bits + 1;                              // positive: grow magnitude
}

namespace {
std::uint16_t next_down(std::uint16_t bits) {
    constexpr std::uint16_t kSign = 0x8000;
    if (bits == 0) return kSign | 0x0001;
    if (bits & kSign) return bits + 1;
    return bits - 1;
}
}  // namespace

std::uint16_t round_down(float value) {
    std::uint16_t h = from_float(value);
    if (to_float(h) > value) h = next_down(h);
    return h;
}

std::uint16_t round_up(float value) {
    std::uint16_t h = from_float(value);
    if (to_float(h) < value) h = next_up(h);
    return h;
}

}  // namespace sikv::half
