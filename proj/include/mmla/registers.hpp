#pragma once

#include <array>
#include <cstdint>

#include "mmla/matrix.hpp"

namespace mmla {

/// 128-bit activation register: a 2x8 row-major sub-matrix of int8.
struct OperandRegA {
    std::array<std::int8_t, 16> lanes{};

    int a(int i, int k) const { return lanes[i * 8 + k]; }

    bool operator==(const OperandRegA&) const = default;
};

/// 128-bit weight register for the symmetric instruction: an 8x2 sub-matrix
/// of int8, column-major (each column is 8 contiguous lanes).
struct OperandRegB8 {
    std::array<std::int8_t, 16> lanes{};

    int b(int k, int j) const { return lanes[j * 8 + k]; }

    bool operator==(const OperandRegB8&) const = default;
};

/// 128-bit weight register for the asymmetric instruction: an 8x4 sub-matrix
/// of int4, column-major. Each column is 8 contiguous nibbles (4 bytes);
/// within a byte the low nibble is the lower row index.
struct OperandRegB4 {
    std::array<std::uint8_t, 16> bytes{};

    int w(int k, int j) const {
        std::uint8_t byte = bytes[j * 4 + k / 2];
        return decode_nibble(k % 2 == 0 ? byte : byte >> 4);
    }

    bool operator==(const OperandRegB4&) const = default;
};

/// Copies the 2x8 window at rows {2*row_pair, 2*row_pair+1},
/// cols {8*col_block .. 8*col_block+7}. Throws BoundsError if the window
/// exceeds the matrix.
OperandRegA extract_reg_a(const I8Matrix& m, int row_pair, int col_block);

/// Copies the 8x2 window at rows {8*row_block ..}, cols {2*col_pair ..}
/// into column-major lanes.
OperandRegB8 extract_reg_b8(const I8Matrix& m, int row_block, int col_pair);

/// Copies the 8x4 window at rows {8*row_block ..}, cols {4*col_block ..}
/// into column-major nibbles.
OperandRegB4 extract_reg_b4(const I4MatrixPacked& m, int row_block, int col_block);

} // namespace mmla
