#pragma once

// Test-only reference models. These stay independent of the kernel code they
// check: plain scalar loops, 64-bit arithmetic, and their own mode reduction.

#include <cstdint>
#include <random>
#include <vector>

#include "mmla/isa.hpp"
#include "mmla/matrix.hpp"

namespace oracle {

inline std::int64_t wrap_to_bits(std::int64_t v, int bits) {
    const std::int64_t span = std::int64_t{1} << bits;
    std::int64_t r = v % span;
    if (r < -(span / 2)) r += span;
    if (r >= span / 2) r -= span;
    return r;
}

/// Per-element accumulator state evolved one dot contribution at a time.
struct CellState {
    std::int64_t value = 0;
    std::int64_t exact = 0;
    bool sticky = false;
    std::uint32_t events = 0;
};

inline void step_cell(CellState& s, std::int64_t dot, mmla::AccMode mode, int bits) {
    const std::int64_t hi = (std::int64_t{1} << (bits - 1)) - 1;
    const std::int64_t lo = -(std::int64_t{1} << (bits - 1));
    s.exact += dot;
    switch (mode) {
        case mmla::AccMode::Wrapping:
            s.value = wrap_to_bits(s.value + dot, bits);
            break;
        case mmla::AccMode::SaturatingSticky:
            if (s.sticky) return;
            s.value += dot;
            if (s.value > hi) {
                s.value = hi;
                s.sticky = true;
            } else if (s.value < lo) {
                s.value = lo;
                s.sticky = true;
            }
            break;
        case mmla::AccMode::ExactTracking:
            s.value = wrap_to_bits(s.value + dot, bits);
            if (s.exact < lo || s.exact > hi) ++s.events;
            break;
    }
}

/// Exact triple-loop GEMM over decoded integer operands.
inline std::vector<std::int64_t> gemm_i64(const std::vector<int>& a, int m, int k,
                                          const std::vector<int>& b, int n) {
    std::vector<std::int64_t> c(static_cast<std::size_t>(m) * n, 0);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < n; ++j) {
            std::int64_t sum = 0;
            for (int kk = 0; kk < k; ++kk)
                sum += static_cast<std::int64_t>(a[static_cast<std::size_t>(i) * k + kk]) *
                       b[static_cast<std::size_t>(kk) * n + j];
            c[static_cast<std::size_t>(i) * n + j] = sum;
        }
    return c;
}

/// Direct 2D convolution, CHW input, kernel weights laid out
/// [c_out][c_in][kh][kw]. Returns [c_out][out_h][out_w] sums.
inline std::vector<std::int64_t> conv_direct(const std::vector<std::int8_t>& input, int c_in,
                                             int in_h, int in_w,
                                             const std::vector<int>& kernels, int c_out,
                                             int kh, int kw, int stride, int padding) {
    int out_h = (in_h + 2 * padding - kh) / stride + 1;
    int out_w = (in_w + 2 * padding - kw) / stride + 1;
    std::vector<std::int64_t> out(static_cast<std::size_t>(c_out) * out_h * out_w, 0);
    for (int co = 0; co < c_out; ++co)
        for (int oy = 0; oy < out_h; ++oy)
            for (int ox = 0; ox < out_w; ++ox) {
                std::int64_t sum = 0;
                for (int ci = 0; ci < c_in; ++ci)
                    for (int ky = 0; ky < kh; ++ky)
                        for (int kx = 0; kx < kw; ++kx) {
                            int iy = oy * stride + ky - padding;
                            int ix = ox * stride + kx - padding;
                            if (iy < 0 || iy >= in_h || ix < 0 || ix >= in_w) continue;
                            sum += static_cast<std::int64_t>(
                                       input[(static_cast<std::size_t>(ci) * in_h + iy) * in_w +
                                             ix]) *
                                   kernels[((static_cast<std::size_t>(co) * c_in + ci) * kh +
                                            ky) *
                                               kw +
                                           kx];
                        }
                out[(static_cast<std::size_t>(co) * out_h + oy) * out_w + ox] = sum;
            }
    return out;
}

// Deterministic operand generators.

inline mmla::I8Matrix random_i8(std::mt19937_64& rng, int rows, int cols, int lo = -128,
                                int hi = 127) {
    std::uniform_int_distribution<int> dist(lo, hi);
    mmla::I8Matrix m(rows, cols);
    for (auto& v : m.data) v = static_cast<std::int8_t>(dist(rng));
    return m;
}

inline mmla::I4MatrixPacked random_i4(std::mt19937_64& rng, int rows, int cols, int lo = -8,
                                      int hi = 7) {
    std::uniform_int_distribution<int> dist(lo, hi);
    std::vector<int> vals(static_cast<std::size_t>(rows) * cols);
    for (auto& v : vals) v = dist(rng);
    return mmla::pack_int4(vals, rows, cols);
}

inline mmla::OperandRegA random_reg_a(std::mt19937_64& rng) {
    std::uniform_int_distribution<int> dist(-128, 127);
    mmla::OperandRegA r;
    for (auto& v : r.lanes) v = static_cast<std::int8_t>(dist(rng));
    return r;
}

inline mmla::OperandRegB8 random_reg_b8(std::mt19937_64& rng) {
    std::uniform_int_distribution<int> dist(-128, 127);
    mmla::OperandRegB8 r;
    for (auto& v : r.lanes) v = static_cast<std::int8_t>(dist(rng));
    return r;
}

inline mmla::OperandRegB4 random_reg_b4(std::mt19937_64& rng) {
    std::uniform_int_distribution<int> dist(-8, 7);
    mmla::OperandRegB4 r;
    for (int j = 0; j < 4; ++j)
        for (int k = 0; k < 8; ++k) {
            std::uint8_t nib = static_cast<std::uint8_t>(dist(rng) & 0xF);
            r.bytes[j * 4 + k / 2] |= k % 2 == 0 ? nib : static_cast<std::uint8_t>(nib << 4);
        }
    return r;
}

inline mmla::AccTile16 random_tile16(std::mt19937_64& rng) {
    std::uniform_int_distribution<int> dist(-32768, 32767);
    mmla::AccTile16 t;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 4; ++j) {
            t.acc[i][j] = static_cast<std::int16_t>(dist(rng));
            t.exact[i][j] = t.acc[i][j];
        }
    return t;
}

inline mmla::AccTile32 random_tile32(std::mt19937_64& rng) {
    std::uniform_int_distribution<std::int32_t> dist(-2147483647 - 1, 2147483647);
    mmla::AccTile32 t;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
            t.acc[i][j] = dist(rng);
            t.exact[i][j] = t.acc[i][j];
        }
    return t;
}

} // namespace oracle
