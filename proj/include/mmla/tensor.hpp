#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mmla/matrix.hpp"

namespace mmla {

enum class DType : std::uint8_t {
    Int8 = 0,
    Int4Packed = 1,
    Int16 = 2,
    Int32 = 3,
};

/// N-dimensional integer tensor backed by its on-disk payload.
///
/// File layout: magic "AQT1", dtype code (1 byte), ndim (1 byte), ndim
/// little-endian u32 dims, then raw little-endian element data. Int4 data is
/// packed two elements per byte (low nibble first); when the element count is
/// odd the last byte's high nibble is zero.
struct Tensor {
    DType dtype = DType::Int8;
    std::vector<std::uint32_t> dims;
    std::vector<std::uint8_t> raw; // payload bytes, little-endian

    std::uint64_t element_count() const;
    std::uint64_t payload_bytes() const;

    static Tensor from(const I8Matrix& m);
    static Tensor from(const I4MatrixPacked& m);
    static Tensor from(const I16Matrix& m);
    static Tensor from(const I32Matrix& m);

    I8Matrix to_i8() const;
    I4MatrixPacked to_i4() const;
    I16Matrix to_i16() const;
    I32Matrix to_i32() const;

    /// Decoded element values regardless of dtype.
    std::vector<std::int64_t> values() const;
};

Tensor load_tensor(const std::string& path);
void save_tensor(const Tensor& t, const std::string& path);

} // namespace mmla
