#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "mmla/errors.hpp"

namespace mmla {

/// Dense row-major matrix of fixed-width integer elements.
template <typename T>
struct Matrix {
    int rows = 0;
    int cols = 0;
    std::vector<T> data; // rows*cols elements, row-major

    Matrix() = default;

    Matrix(int r, int c, T fill = T{0})
        : rows(r), cols(c) {
        if (r < 0 || c < 0) throw ShapeError("matrix dimensions must be non-negative");
        data.assign(static_cast<std::size_t>(r) * static_cast<std::size_t>(c), fill);
    }

    Matrix(int r, int c, std::vector<T> d)
        : rows(r), cols(c), data(std::move(d)) {
        if (r < 0 || c < 0) throw ShapeError("matrix dimensions must be non-negative");
        if (data.size() != static_cast<std::size_t>(r) * static_cast<std::size_t>(c))
            throw ShapeError("matrix data length does not match rows*cols");
    }

    T& operator()(int r, int c) { return data[static_cast<std::size_t>(r) * cols + c]; }
    const T& operator()(int r, int c) const { return data[static_cast<std::size_t>(r) * cols + c]; }

    T at(int r, int c) const {
        if (r < 0 || r >= rows || c < 0 || c >= cols)
            throw BoundsError("matrix index out of range");
        return (*this)(r, c);
    }

    bool operator==(const Matrix&) const = default;
};

using I8Matrix = Matrix<std::int8_t>;
using I16Matrix = Matrix<std::int16_t>;
using I32Matrix = Matrix<std::int32_t>;
using I64Matrix = Matrix<std::int64_t>;
using U8Matrix = Matrix<std::uint8_t>;
using U32Matrix = Matrix<std::uint32_t>;

/// Encode a signed value in [-8, 7] as a two's-complement nibble.
constexpr std::uint8_t encode_nibble(int v) { return static_cast<std::uint8_t>(v & 0xF); }

/// Decode a two's-complement nibble (0xF -> -1, 0x8 -> -8).
constexpr int decode_nibble(std::uint8_t n) {
    int v = n & 0xF;
    return v >= 8 ? v - 16 : v;
}

/// Matrix of signed 4-bit elements, two per byte. Element (r,c) lives at
/// byte (r*cols+c)/2, in the low nibble when r*cols+c is even. When
/// rows*cols is odd the final high nibble is zero.
struct I4MatrixPacked {
    int rows = 0;
    int cols = 0;
    std::vector<std::uint8_t> data; // ceil(rows*cols / 2) bytes

    I4MatrixPacked() = default;
    I4MatrixPacked(int r, int c);
    I4MatrixPacked(int r, int c, std::vector<std::uint8_t> bytes);

    std::size_t element_count() const {
        return static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols);
    }

    /// Decoded element value in [-8, 7].
    int get(int r, int c) const {
        std::size_t idx = static_cast<std::size_t>(r) * cols + c;
        std::uint8_t byte = data[idx / 2];
        return decode_nibble(idx % 2 == 0 ? byte : byte >> 4);
    }

    void set(int r, int c, int v);

    int at(int r, int c) const {
        if (r < 0 || r >= rows || c < 0 || c >= cols)
            throw BoundsError("matrix index out of range");
        return get(r, c);
    }

    bool operator==(const I4MatrixPacked&) const = default;
};

/// Packs values in [-8, 7] into nibble storage. Throws RangeError on an
/// out-of-range value and ShapeError on a length mismatch.
I4MatrixPacked pack_int4(std::span<const int> values, int rows, int cols);

/// Inverse of pack_int4; sign-extends each nibble.
std::vector<int> unpack_int4(const I4MatrixPacked& m);

enum class Int4Extension { Sign, Zero };

/// Expands packed int4 elements to int8 of the same shape. Sign extension
/// preserves the signed value; zero extension reads the nibble as unsigned
/// (baseline comparison only).
I8Matrix widen_int4_to_int8(const I4MatrixPacked& m, Int4Extension ext = Int4Extension::Sign);

/// Zero-pads up to the next multiple of (row_mult, col_mult).
I8Matrix pad_to_multiple(const I8Matrix& m, int row_mult, int col_mult);
I4MatrixPacked pad_to_multiple(const I4MatrixPacked& m, int row_mult, int col_mult);

} // namespace mmla
