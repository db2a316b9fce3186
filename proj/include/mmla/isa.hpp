#pragma once

#include <array>
#include <cstdint>

#include "mmla/registers.hpp"

namespace mmla {

/// Accumulator semantics applied at each accumulate step.
///
/// Wrapping: two's-complement modular arithmetic at the accumulator width.
/// SaturatingSticky: clamp to the width's extremes; once clamped the element
/// latches there permanently.
/// ExactTracking: element values wrap, but a side accumulator keeps the exact
/// running sum and every step whose exact value lies outside the accumulator
/// range is counted as an overflow event.
enum class AccMode {
    Wrapping,
    SaturatingSticky,
    ExactTracking,
};

/// 2x2 int32 destination tile of the symmetric instruction (128-bit payload).
/// The exact side sums and event counters are measurement state for
/// ExactTracking; sticky flags latch in SaturatingSticky mode.
struct AccTile32 {
    std::array<std::array<std::int32_t, 2>, 2> acc{};
    std::array<std::array<std::uint8_t, 2>, 2> sticky{};
    std::array<std::array<std::int64_t, 2>, 2> exact{};
    std::array<std::array<std::uint32_t, 2>, 2> overflow_events{};

    std::uint64_t total_overflow_events() const;
    bool operator==(const AccTile32&) const = default;
};

/// 2x4 int16 destination tile of the asymmetric instruction (128-bit payload).
struct AccTile16 {
    std::array<std::array<std::int16_t, 4>, 2> acc{};
    std::array<std::array<std::uint8_t, 4>, 2> sticky{};
    std::array<std::array<std::int64_t, 4>, 2> exact{};
    std::array<std::array<std::uint32_t, 4>, 2> overflow_events{};

    std::uint64_t total_overflow_events() const;
    bool operator==(const AccTile16&) const = default;
};

/// Symmetric matrix MAC: for each (i,j) in 2x2,
/// acc[i][j] += sum_k A[i][k]*B[k][j] under `mode` at 32-bit width.
/// The 8-product dot is computed exactly and reduced once at the accumulate
/// boundary.
AccTile32 smmla(AccTile32 acc, const OperandRegA& a, const OperandRegB8& b, AccMode mode);

/// Asymmetric matrix MAC: for each (i,j) in 2x4,
/// acc[i][j] += sum_k A[i][k]*W[k][j] under `mode` at 16-bit width, where W
/// is the sign-extended int4 weight. Individual products lie in [-1016, 1024].
AccTile16 ammla(AccTile16 acc, const OperandRegA& a, const OperandRegB4& b, AccMode mode);

/// Baseline path: widens the 8x2 int4 window at (8*row_block, 2*col_pair) to
/// int8 and delegates to smmla. Covers half the asymmetric instruction's
/// weight width, so a full tile of C needs twice the instructions.
AccTile32 ammla_via_widening(AccTile32 acc, const OperandRegA& a, const I4MatrixPacked& b4,
                             int row_block, int col_pair, AccMode mode);

/// True iff one ammla from a zero tile in ExactTracking mode reports no
/// overflow events and reproduces the mathematically exact 2x4 product.
bool tile_equivalence_check(const OperandRegA& a, const OperandRegB4& b);

namespace detail {

/// Exact 2x4 dot products of one asymmetric instruction, before accumulation.
std::array<std::array<std::int32_t, 4>, 2> ammla_dots(const OperandRegA& a,
                                                      const OperandRegB4& b);

/// Exact 2x2 dot products of one symmetric instruction.
std::array<std::array<std::int32_t, 2>, 2> smmla_dots(const OperandRegA& a,
                                                      const OperandRegB8& b);

/// Reduces v into the signed two's-complement range of `bits` bits.
std::int64_t wrap_signed(std::int64_t v, int bits);

/// Smallest signed bit width whose range contains v (1 for 0 and -1).
int bits_needed(std::int64_t v);

/// One accumulate step at `bits`-wide signed bounds. `value` holds the
/// mode-reduced element, `exact` the unbounded running sum.
void acc_step(std::int64_t& value, std::int64_t& exact, std::uint8_t& sticky,
              std::uint32_t& events, std::int64_t dot, AccMode mode, int bits);

} // namespace detail

} // namespace mmla
