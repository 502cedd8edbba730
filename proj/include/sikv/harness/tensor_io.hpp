#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "sikv/common.hpp"

// "KVT1" tensor files: the ingestion path for synthetic workloads and real
// key/value dumps.
//
//   offset 0   magic "KVT1"
//   offset 4   u16 version (= 1)
//   offset 6   u8  dtype (0 = float32, 1 = float16)
//   offset 7   u8  ndims
//   offset 8   u64 dims[ndims]
//   then       row-major element data
//
// Everything is little-endian. float16 data is widened to float on load.
namespace sikv::io {

enum class DType : std::uint8_t { f32 = 0, f16 = 1 };

struct Tensor {
    std::vector<std::uint64_t> dims;
    std::vector<float> data;

    std::uint64_t element_count() const;
    bool operator==(const Tensor&) const = default;
};

inline constexpr std::size_t kHeaderFixedBytes = 8;

std::vector<std::uint8_t> encode_tensor(const Tensor& tensor, DType dtype = DType::f32);
/// Throws FormatError (with byte offsets) on bad magic, version, dtype or a
/// payload whose length does not match the declared dims.
Tensor decode_tensor(std::span<const std::uint8_t> bytes);

void save_tensor(const Tensor& tensor, const std::filesystem::path& path, DType dtype = DType::f32);
Tensor load_tensor(const std::filesystem::path& path);

Tensor to_tensor(const Matrix& m);
/// Requires a 2-D tensor.
Matrix to_matrix(const Tensor& t);

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

}  // namespace sikv::io
