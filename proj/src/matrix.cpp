#include "mmla/matrix.hpp"

#include "mmla/registers.hpp"

#include <string>

namespace mmla {

namespace {

std::size_t packed_bytes(int rows, int cols) {
    std::size_t n = static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols);
    return (n + 1) / 2;
}

} // namespace

I4MatrixPacked::I4MatrixPacked(int r, int c) : rows(r), cols(c) {
    if (r < 0 || c < 0) throw ShapeError("matrix dimensions must be non-negative");
    data.assign(packed_bytes(r, c), 0);
}

I4MatrixPacked::I4MatrixPacked(int r, int c, std::vector<std::uint8_t> bytes)
    : rows(r), cols(c), data(std::move(bytes)) {
    if (r < 0 || c < 0) throw ShapeError("matrix dimensions must be non-negative");
    if (data.size() != packed_bytes(r, c))
        throw ShapeError("packed data length does not match ceil(rows*cols/2)");
    if (element_count() % 2 == 1 && !data.empty() && (data.back() & 0xF0) != 0)
        throw FormatError("final high nibble must be zero for odd element counts");
}

void I4MatrixPacked::set(int r, int c, int v) {
    if (v < -8 || v > 7) throw RangeError("int4 value out of [-8, 7]");
    std::size_t idx = static_cast<std::size_t>(r) * cols + c;
    std::uint8_t& byte = data[idx / 2];
    if (idx % 2 == 0)
        byte = static_cast<std::uint8_t>((byte & 0xF0) | encode_nibble(v));
    else
        byte = static_cast<std::uint8_t>((byte & 0x0F) | (encode_nibble(v) << 4));
}

I4MatrixPacked pack_int4(std::span<const int> values, int rows, int cols) {
    if (rows < 0 || cols < 0) throw ShapeError("matrix dimensions must be non-negative");
    if (values.size() != static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols))
        throw ShapeError("value count does not match rows*cols");
    I4MatrixPacked m(rows, cols);
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (values[i] < -8 || values[i] > 7)
            throw RangeError("int4 value out of [-8, 7]: " + std::to_string(values[i]));
        std::uint8_t nib = encode_nibble(values[i]);
        if (i % 2 == 0)
            m.data[i / 2] |= nib;
        else
            m.data[i / 2] |= static_cast<std::uint8_t>(nib << 4);
    }
    return m;
}

std::vector<int> unpack_int4(const I4MatrixPacked& m) {
    std::vector<int> out(m.element_count());
    for (std::size_t i = 0; i < out.size(); ++i) {
        std::uint8_t byte = m.data[i / 2];
        out[i] = decode_nibble(i % 2 == 0 ? byte : byte >> 4);
    }
    return out;
}

I8Matrix widen_int4_to_int8(const I4MatrixPacked& m, Int4Extension ext) {
    I8Matrix out(m.rows, m.cols);
    for (std::size_t i = 0; i < out.data.size(); ++i) {
        std::uint8_t byte = m.data[i / 2];
        std::uint8_t nib = (i % 2 == 0 ? byte : byte >> 4) & 0xF;
        out.data[i] = ext == Int4Extension::Sign ? static_cast<std::int8_t>(decode_nibble(nib))
                                                 : static_cast<std::int8_t>(nib);
    }
    return out;
}

I8Matrix pad_to_multiple(const I8Matrix& m, int row_mult, int col_mult) {
    if (row_mult < 1 || col_mult < 1) throw ShapeError("pad multiples must be positive");
    int pr = (m.rows + row_mult - 1) / row_mult * row_mult;
    int pc = (m.cols + col_mult - 1) / col_mult * col_mult;
    if (pr == m.rows && pc == m.cols) return m;
    I8Matrix out(pr, pc);
    for (int r = 0; r < m.rows; ++r)
        for (int c = 0; c < m.cols; ++c)
            out(r, c) = m(r, c);
    return out;
}

I4MatrixPacked pad_to_multiple(const I4MatrixPacked& m, int row_mult, int col_mult) {
    if (row_mult < 1 || col_mult < 1) throw ShapeError("pad multiples must be positive");
    int pr = (m.rows + row_mult - 1) / row_mult * row_mult;
    int pc = (m.cols + col_mult - 1) / col_mult * col_mult;
    if (pr == m.rows && pc == m.cols) return m;
    I4MatrixPacked out(pr, pc);
    for (int r = 0; r < m.rows; ++r)
        for (int c = 0; c < m.cols; ++c)
            out.set(r, c, m.get(r, c));
    return out;
}

OperandRegA extract_reg_a(const I8Matrix& m, int row_pair, int col_block) {
    int r0 = 2 * row_pair;
    int c0 = 8 * col_block;
    if (row_pair < 0 || col_block < 0 || r0 + 2 > m.rows || c0 + 8 > m.cols)
        throw BoundsError("2x8 activation window exceeds matrix");
    OperandRegA reg;
    for (int i = 0; i < 2; ++i)
        for (int k = 0; k < 8; ++k)
            reg.lanes[i * 8 + k] = m(r0 + i, c0 + k);
    return reg;
}

OperandRegB8 extract_reg_b8(const I8Matrix& m, int row_block, int col_pair) {
    int r0 = 8 * row_block;
    int c0 = 2 * col_pair;
    if (row_block < 0 || col_pair < 0 || r0 + 8 > m.rows || c0 + 2 > m.cols)
        throw BoundsError("8x2 weight window exceeds matrix");
    OperandRegB8 reg;
    for (int j = 0; j < 2; ++j)
        for (int k = 0; k < 8; ++k)
            reg.lanes[j * 8 + k] = m(r0 + k, c0 + j);
    return reg;
}

OperandRegB4 extract_reg_b4(const I4MatrixPacked& m, int row_block, int col_block) {
    int r0 = 8 * row_block;
    int c0 = 4 * col_block;
    if (row_block < 0 || col_block < 0 || r0 + 8 > m.rows || c0 + 4 > m.cols)
        throw BoundsError("8x4 weight window exceeds matrix");
    OperandRegB4 reg;
    for (int j = 0; j < 4; ++j)
        for (int k = 0; k < 8; ++k) {
            std::uint8_t nib = encode_nibble(m.get(r0 + k, c0 + j));
            std::uint8_t& byte = reg.bytes[j * 4 + k / 2];
            byte |= k % 2 == 0 ? nib : static_cast<std::uint8_t>(nib << 4);
        }
    return reg;
}

} // namespace mmla
