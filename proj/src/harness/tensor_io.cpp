#include "sikv/harness/tensor_io.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <limits>

#include "sikv/detail/bytes.hpp"
#include "sikv/half.hpp"

namespace sikv::io {

namespace {

constexpr std::array<std::uint8_t, 4> kMagic = {'K', 'V', 'T', '1'};
constexpr std::uint16_t kVersion = 1;

std::size_t dtype_size(DType dtype) { return dtype == DType::f32 ? 4 : 2; }

}  // namespace

std::uint64_t Tensor::element_count() const {
    std::uint64_t n = 1;
    for (auto d : dims) {
        if (d != 0 && n > std::numeric_limits<std::uint64_t>::max() / d) {
            throw FormatError("tensor element count overflows 64 bits");
        }
        n *= d;
    }
    return n;
}

std::vector<std::uint8_t> encode_tensor(const Tensor& tensor, DType dtype) {
    if (tensor.dims.size() > 255) throw ValidationError("tensor has more than 255 dimensions");
    if (tensor.element_count() != tensor.data.size()) {
        throw DimensionError("tensor dims declare " + std::to_string(tensor.element_count()) +
                             " elements but data holds " + std::to_string(tensor.data.size()));
    }
    detail::ByteWriter w;
    w.put_bytes(kMagic);
    w.put(kVersion);
    w.put(static_cast<std::uint8_t>(dtype));
    w.put(static_cast<std::uint8_t>(tensor.dims.size()));
    for (auto d : tensor.dims) w.put(d);
    if (dtype == DType::f32) {
        w.put_all(std::span<const float>(tensor.data));
    } else {
        for (float v : tensor.data) w.put(half::from_float(v));
    }
    return std::move(w.bytes());
}

Tensor decode_tensor(std::span<const std::uint8_t> bytes) {
    detail::ByteReader r(bytes);
    const auto magic = r.get_bytes(4, "tensor magic");
    if (!std::equal(magic.begin(), magic.end(), kMagic.begin())) {
        throw FormatError("tensor: bad magic at byte offset 0 (expected \"KVT1\")");
    }
    const auto version = r.get<std::uint16_t>("tensor version");
    if (version != kVersion) {
        throw FormatError("tensor: unsupported version " + std::to_string(version) + " at byte offset 4");
    }
    const auto dtype_byte = r.get<std::uint8_t>("tensor dtype");
    if (dtype_byte > 1) {
        throw FormatError("tensor: unknown dtype " + std::to_string(dtype_byte) + " at byte offset 6");
    }
    const auto dtype = static_cast<DType>(dtype_byte);
    const auto ndims = r.get<std::uint8_t>("tensor ndims");

    Tensor t;
    t.dims = r.get_all<std::uint64_t>(ndims, "tensor dims");
    const std::uint64_t count = t.element_count();
    const std::size_t elem = dtype_size(dtype);
    const std::size_t offset = r.offset();
    if (count > r.remaining() / elem || count * elem != r.remaining()) {
        const std::uint64_t expected = count > std::numeric_limits<std::uint64_t>::max() / elem
                                           ? std::numeric_limits<std::uint64_t>::max()
                                           : count * elem;
        throw FormatError("tensor: payload at byte offset " + std::to_string(offset) + " should hold " +
                          std::to_string(expected) + " bytes (" + std::to_string(count) +
                          " elements), file has " + std::to_string(r.remaining()) +
                          " bytes; expected total file size " +
                          std::to_string(offset + expected) + ", actual " + std::to_string(bytes.size()));
    }
    if (dtype == DType::f32) {
        t.data = r.get_all<float>(count, "tensor data");
    } else {
        t.data.reserve(count);
        for (std::uint64_t i = 0; i < count; ++i) {
            t.data.push_back(half::to_float(r.get<std::uint16_t>("tensor data")));
        }
    }
    return t;
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open " + path.string());
    return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in), {});
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw FormatError("cannot write " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw FormatError("short write to " + path.string());
}

void save_tensor(const Tensor& tensor, const std::filesystem::path& path, DType dtype) {
    write_file(path, encode_tensor(tensor, dtype));
}

Tensor load_tensor(const std::filesystem::path& path) {
    try {
        return decode_tensor(read_file(path));
    } catch (const FormatError& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
}

Tensor to_tensor(const Matrix& m) {
    return Tensor{{m.rows(), m.cols()}, std::vector<float>(m.flat().begin(), m.flat().end())};
}

Matrix to_matrix(const Tensor& t) {
    if (t.dims.size() != 2) {
        throw DimensionError("expected a 2-D tensor, got " + std::to_string(t.dims.size()) + " dims");
    }
    return Matrix(t.dims[0], t.dims[1], t.data);
}

}  // namespace sikv::io
