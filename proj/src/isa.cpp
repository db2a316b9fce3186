#include "mmla/isa.hpp"

#include <bit>

namespace mmla {

namespace detail {

std::int64_t wrap_signed(std::int64_t v, int bits) {
    std::uint64_t m = std::uint64_t{1} << bits;
    std::uint64_t r = static_cast<std::uint64_t>(v) & (m - 1);
    return r >= m / 2 ? static_cast<std::int64_t>(r) - static_cast<std::int64_t>(m)
                      : static_cast<std::int64_t>(r);
}

int bits_needed(std::int64_t v) {
    std::uint64_t mag = v >= 0 ? static_cast<std::uint64_t>(v)
                               : static_cast<std::uint64_t>(-(v + 1));
    return std::bit_width(mag) + 1;
}

void acc_step(std::int64_t& value, std::int64_t& exact, std::uint8_t& sticky,
              std::uint32_t& events, std::int64_t dot, AccMode mode, int bits) {
    const std::int64_t hi = (std::int64_t{1} << (bits - 1)) - 1;
    const std::int64_t lo = -(std::int64_t{1} << (bits - 1));
    exact += dot;
    switch (mode) {
        case AccMode::Wrapping:
            value = wrap_signed(value + dot, bits);
            break;
        case AccMode::SaturatingSticky: {
            if (sticky) break; // latched: the element never changes again
            std::int64_t s = value + dot;
            if (s > hi) {
                value = hi;
                sticky = 1;
            } else if (s < lo) {
                value = lo;
                sticky = 1;
            } else {
                value = s;
            }
            break;
        }
        case AccMode::ExactTracking:
            value = wrap_signed(value + dot, bits);
            if (exact < lo || exact > hi) ++events;
            break;
    }
}

std::array<std::array<std::int32_t, 4>, 2> ammla_dots(const OperandRegA& a,
                                                      const OperandRegB4& b) {
    std::array<std::array<std::int32_t, 4>, 2> dots{};
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 4; ++j) {
            std::int32_t d = 0;
            for (int k = 0; k < 8; ++k) d += a.a(i, k) * b.w(k, j);
            dots[i][j] = d;
        }
    return dots;
}

std::array<std::array<std::int32_t, 2>, 2> smmla_dots(const OperandRegA& a,
                                                      const OperandRegB8& b) {
    std::array<std::array<std::int32_t, 2>, 2> dots{};
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
            std::int32_t d = 0;
            for (int k = 0; k < 8; ++k) d += a.a(i, k) * b.b(k, j);
            dots[i][j] = d;
        }
    return dots;
}

} // namespace detail

std::uint64_t AccTile32::total_overflow_events() const {
    std::uint64_t n = 0;
    for (auto& row : overflow_events)
        for (auto e : row) n += e;
    return n;
}

std::uint64_t AccTile16::total_overflow_events() const {
    std::uint64_t n = 0;
    for (auto& row : overflow_events)
        for (auto e : row) n += e;
    return n;
}

AccTile32 smmla(AccTile32 acc, const OperandRegA& a, const OperandRegB8& b, AccMode mode) {
    auto dots = detail::smmla_dots(a, b);
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
            std::int64_t value = acc.acc[i][j];
            detail::acc_step(value, acc.exact[i][j], acc.sticky[i][j],
                             acc.overflow_events[i][j], dots[i][j], mode, 32);
            acc.acc[i][j] = static_cast<std::int32_t>(value);
        }
    return acc;
}

AccTile16 ammla(AccTile16 acc, const OperandRegA& a, const OperandRegB4& b, AccMode mode) {
    auto dots = detail::ammla_dots(a, b);
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 4; ++j) {
            std::int64_t value = acc.acc[i][j];
            detail::acc_step(value, acc.exact[i][j], acc.sticky[i][j],
                             acc.overflow_events[i][j], dots[i][j], mode, 16);
            acc.acc[i][j] = static_cast<std::int16_t>(value);
        }
    return acc;
}

AccTile32 ammla_via_widening(AccTile32 acc, const OperandRegA& a, const I4MatrixPacked& b4,
                             int row_block, int col_pair, AccMode mode) {
    int r0 = 8 * row_block;
    int c0 = 2 * col_pair;
    if (row_block < 0 || col_pair < 0 || r0 + 8 > b4.rows || c0 + 2 > b4.cols)
        throw BoundsError("8x2 weight window exceeds matrix");
    OperandRegB8 widened;
    for (int j = 0; j < 2; ++j)
        for (int k = 0; k < 8; ++k)
            widened.lanes[j * 8 + k] = static_cast<std::int8_t>(b4.get(r0 + k, c0 + j));
    return smmla(acc, a, widened, mode);
}

bool tile_equivalence_check(const OperandRegA& a, const OperandRegB4& b) {
    AccTile16 tile = ammla(AccTile16{}, a, b, AccMode::ExactTracking);
    if (tile.total_overflow_events() != 0) return false;
    auto dots = detail::ammla_dots(a, b);
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 4; ++j)
            if (tile.acc[i][j] != dots[i][j]) return false;
    return true;
}

} // namespace mmla
