#include "mmla/tensor.hpp"

#include <cstring>
#include <fstream>

namespace mmla {

namespace {

constexpr char kMagic[4] = {'A', 'Q', 'T', '1'};
constexpr int kMaxNdim = 8;

std::uint64_t bytes_for(DType dtype, std::uint64_t count) {
    switch (dtype) {
        case DType::Int8: return count;
        case DType::Int4Packed: return (count + 1) / 2;
        case DType::Int16: return count * 2;
        case DType::Int32: return count * 4;
    }
    throw FormatError("unknown dtype code");
}

void require_2d(const Tensor& t, DType dtype, const char* what) {
    if (t.dtype != dtype) throw FormatError(std::string("tensor dtype is not ") + what);
    if (t.dims.size() != 2) throw FormatError("tensor is not 2-dimensional");
}

void put_u32_le(std::vector<std::uint8_t>& out, std::uint32_t v) {
    out.push_back(static_cast<std::uint8_t>(v));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
    out.push_back(static_cast<std::uint8_t>(v >> 16));
    out.push_back(static_cast<std::uint8_t>(v >> 24));
}

std::uint32_t get_u32_le(const std::uint8_t* p) {
    return static_cast<std::uint32_t>(p[0]) | static_cast<std::uint32_t>(p[1]) << 8 |
           static_cast<std::uint32_t>(p[2]) << 16 | static_cast<std::uint32_t>(p[3]) << 24;
}

} // namespace

std::uint64_t Tensor::element_count() const {
    std::uint64_t n = 1;
    for (auto d : dims) n *= d;
    return dims.empty() ? 0 : n;
}

std::uint64_t Tensor::payload_bytes() const { return bytes_for(dtype, element_count()); }

Tensor Tensor::from(const I8Matrix& m) {
    Tensor t;
    t.dtype = DType::Int8;
    t.dims = {static_cast<std::uint32_t>(m.rows), static_cast<std::uint32_t>(m.cols)};
    t.raw.resize(m.data.size());
    std::memcpy(t.raw.data(), m.data.data(), m.data.size());
    return t;
}

Tensor Tensor::from(const I4MatrixPacked& m) {
    Tensor t;
    t.dtype = DType::Int4Packed;
    t.dims = {static_cast<std::uint32_t>(m.rows), static_cast<std::uint32_t>(m.cols)};
    t.raw = m.data;
    return t;
}

Tensor Tensor::from(const I16Matrix& m) {
    Tensor t;
    t.dtype = DType::Int16;
    t.dims = {static_cast<std::uint32_t>(m.rows), static_cast<std::uint32_t>(m.cols)};
    t.raw.reserve(m.data.size() * 2);
    for (std::int16_t v : m.data) {
        std::uint16_t u = static_cast<std::uint16_t>(v);
        t.raw.push_back(static_cast<std::uint8_t>(u));
        t.raw.push_back(static_cast<std::uint8_t>(u >> 8));
    }
    return t;
}

Tensor Tensor::from(const I32Matrix& m) {
    Tensor t;
    t.dtype = DType::Int32;
    t.dims = {static_cast<std::uint32_t>(m.rows), static_cast<std::uint32_t>(m.cols)};
    t.raw.reserve(m.data.size() * 4);
    for (std::int32_t v : m.data) put_u32_le(t.raw, static_cast<std::uint32_t>(v));
    return t;
}

I8Matrix Tensor::to_i8() const {
    require_2d(*this, DType::Int8, "int8");
    I8Matrix m(static_cast<int>(dims[0]), static_cast<int>(dims[1]));
    std::memcpy(m.data.data(), raw.data(), raw.size());
    return m;
}

I4MatrixPacked Tensor::to_i4() const {
    require_2d(*this, DType::Int4Packed, "int4-packed");
    return I4MatrixPacked(static_cast<int>(dims[0]), static_cast<int>(dims[1]), raw);
}

I16Matrix Tensor::to_i16() const {
    require_2d(*this, DType::Int16, "int16");
    I16Matrix m(static_cast<int>(dims[0]), static_cast<int>(dims[1]));
    for (std::size_t i = 0; i < m.data.size(); ++i) {
        std::uint16_t u = static_cast<std::uint16_t>(raw[2 * i]) |
                          static_cast<std::uint16_t>(raw[2 * i + 1]) << 8;
        m.data[i] = static_cast<std::int16_t>(u);
    }
    return m;
}

I32Matrix Tensor::to_i32() const {
    require_2d(*this, DType::Int32, "int32");
    I32Matrix m(static_cast<int>(dims[0]), static_cast<int>(dims[1]));
    for (std::size_t i = 0; i < m.data.size(); ++i)
        m.data[i] = static_cast<std::int32_t>(get_u32_le(raw.data() + 4 * i));
    return m;
}

std::vector<std::int64_t> Tensor::values() const {
    std::uint64_t n = element_count();
    std::vector<std::int64_t> out(n);
    switch (dtype) {
        case DType::Int8:
            for (std::uint64_t i = 0; i < n; ++i) out[i] = static_cast<std::int8_t>(raw[i]);
            break;
        case DType::Int4Packed:
            for (std::uint64_t i = 0; i < n; ++i) {
                std::uint8_t byte = raw[i / 2];
                out[i] = decode_nibble(i % 2 == 0 ? byte : byte >> 4);
            }
            break;
        case DType::Int16:
            for (std::uint64_t i = 0; i < n; ++i) {
                std::uint16_t u = static_cast<std::uint16_t>(raw[2 * i]) |
                                  static_cast<std::uint16_t>(raw[2 * i + 1]) << 8;
                out[i] = static_cast<std::int16_t>(u);
            }
            break;
        case DType::Int32:
            for (std::uint64_t i = 0; i < n; ++i)
                out[i] = static_cast<std::int32_t>(get_u32_le(raw.data() + 4 * i));
            break;
    }
    return out;
}

Tensor load_tensor(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open tensor file: " + path);
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());

    if (bytes.size() < 6) throw FormatError("truncated tensor file: " + path);
    if (std::memcmp(bytes.data(), kMagic, 4) != 0)
        throw FormatError("bad magic bytes in tensor file: " + path);
    std::uint8_t dtype_code = bytes[4];
    if (dtype_code > 3) throw FormatError("bad dtype code in tensor file: " + path);
    std::uint8_t ndim = bytes[5];
    if (ndim == 0 || ndim > kMaxNdim) throw FormatError("bad ndim in tensor file: " + path);

    std::size_t header = 6 + static_cast<std::size_t>(ndim) * 4;
    if (bytes.size() < header) throw FormatError("truncated tensor header: " + path);

    Tensor t;
    t.dtype = static_cast<DType>(dtype_code);
    t.dims.resize(ndim);
    for (int i = 0; i < ndim; ++i) t.dims[i] = get_u32_le(bytes.data() + 6 + 4 * i);

    std::uint64_t expected = t.payload_bytes();
    if (bytes.size() - header != expected)
        throw FormatError("tensor payload size mismatch: " + path);
    t.raw.assign(bytes.begin() + static_cast<std::ptrdiff_t>(header), bytes.end());

    if (t.dtype == DType::Int4Packed && t.element_count() % 2 == 1 && !t.raw.empty() &&
        (t.raw.back() & 0xF0) != 0)
        throw FormatError("nonzero trailing nibble in int4 tensor: " + path);
    return t;
}

void save_tensor(const Tensor& t, const std::string& path) {
    if (t.dims.empty() || t.dims.size() > kMaxNdim)
        throw FormatError("tensor must have between 1 and 8 dims");
    if (t.raw.size() != t.payload_bytes())
        throw FormatError("tensor payload does not match its dims");

    std::vector<std::uint8_t> bytes;
    bytes.insert(bytes.end(), kMagic, kMagic + 4);
    bytes.push_back(static_cast<std::uint8_t>(t.dtype));
    bytes.push_back(static_cast<std::uint8_t>(t.dims.size()));
    for (auto d : t.dims) put_u32_le(bytes, d);
    bytes.insert(bytes.end(), t.raw.begin(), t.raw.end());

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw FormatError("cannot open tensor file for writing: " + path);
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) throw FormatError("failed to write tensor file: " + path);
}

} // namespace mmla
