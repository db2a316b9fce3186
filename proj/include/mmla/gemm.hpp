#pragma once

#include <array>
#include <cstdint>
#include <span>

#include "mmla/isa.hpp"
#include "mmla/matrix.hpp"

namespace mmla {

/// Work counters for one GEMM run. load_ops counts 128-bit register fills:
/// each distinct operand window is filled exactly once and reused by every
/// instruction that consumes it. macs counts scalar multiply-accumulates
/// (32 per symmetric instruction, 64 per asymmetric one).
struct GemmCounters {
    std::uint64_t mac_instructions = 0;
    std::uint64_t load_ops = 0;
    std::uint64_t macs = 0;
    std::uint64_t output_elements = 0;

    bool operator==(const GemmCounters&) const = default;
};

/// Convolution layer geometry. Reduction depth per output element is
/// c_in * kw * kh.
struct ConvLayerSpec {
    int c_in = 1;
    int c_out = 1;
    int kw = 1;
    int kh = 1;
    int in_w = 1;
    int in_h = 1;
    int stride = 1;
    int padding = 0;

    int reduction_depth() const { return c_in * kw * kh; }
    int out_w() const { return (in_w + 2 * padding - kw) / stride + 1; }
    int out_h() const { return (in_h + 2 * padding - kh) / stride + 1; }
};

/// Exact triple-loop product in 64-bit arithmetic; the oracle every kernel is
/// checked against. Throws ShapeError on non-conforming shapes and RangeError
/// if a result exceeds int32.
I32Matrix gemm_reference(const I8Matrix& a, const I8Matrix& b);
I32Matrix gemm_reference(const I8Matrix& a, const I4MatrixPacked& b);

struct SymGemmResult {
    I32Matrix values;
    U8Matrix sticky;
    U32Matrix overflow_events;
    GemmCounters counters;
};

/// Tiled int8 x int8 GEMM built from smmla. Inputs are zero-padded up to
/// (2,8)x(8,2) tile multiples and the result is cropped back. Tile loop order
/// is fixed: k blocks outermost, then row pairs, then column blocks.
SymGemmResult gemm_symmetric(const I8Matrix& a, const I8Matrix& b,
                             AccMode mode = AccMode::Wrapping);

struct AsymGemmResult {
    I16Matrix values;
    U8Matrix sticky;
    U32Matrix overflow_events;
    std::uint64_t total_steps = 0;    // accumulate steps over uncropped outputs
    std::uint64_t overflow_steps = 0; // ExactTracking events
    GemmCounters counters;
};

/// Tiled int8 x int4 GEMM built from ammla, accumulating into 16-bit
/// elements. Same padding and loop order as gemm_symmetric with 2x4 output
/// tiles; uses half the instructions of gemm_symmetric for equal M,K,N.
AsymGemmResult gemm_asymmetric(const I8Matrix& a, const I4MatrixPacked& b,
                               AccMode mode = AccMode::Wrapping);

struct TrackedGemmResult {
    I32Matrix values; // wrapped to acc_bits
    U32Matrix overflow_events;
    std::uint64_t total_steps = 0;
    std::uint64_t overflow_steps = 0;
    // needed_width_histogram[b] counts accumulate steps whose exact running
    // sum needs exactly b signed bits; overflow counts for any width follow
    // from the tail sums.
    std::array<std::uint64_t, 66> needed_width_histogram{};
    GemmCounters counters;

    std::uint64_t overflow_steps_at_width(int bits) const;
};

/// The asymmetric GEMM in ExactTracking mode generalized to an acc_bits-wide
/// accumulator, 8 <= acc_bits <= 32. Identical tile iteration and dot
/// products as gemm_asymmetric.
TrackedGemmResult gemm_asymmetric_tracked(const I8Matrix& a, const I4MatrixPacked& b,
                                          int acc_bits);

struct WidenedGemmResult {
    I32Matrix values;
    U8Matrix sticky;
    U32Matrix overflow_events;
    GemmCounters counters;
};

/// Baseline: int4 weights widened to int8 inside each instruction
/// (ammla_via_widening), accumulating into 32-bit tiles. Produces the same
/// mathematical values as gemm_asymmetric while issuing twice the
/// instructions.
WidenedGemmResult gemm_asymmetric_via_widening(const I8Matrix& a, const I4MatrixPacked& b,
                                               AccMode mode = AccMode::Wrapping);

/// Lowers a CHW int8 tensor to the GEMM operand whose rows are output
/// positions and whose columns run over (c_in, kh, kw).
I8Matrix im2col(std::span<const std::int8_t> input_chw, const ConvLayerSpec& spec);

struct ThroughputReport {
    std::uint64_t sym_instructions = 0;
    std::uint64_t asym_instructions = 0;
    double ratio = 0.0;
};

/// Instruction counts for both kernels on a tile-aligned problem
/// (M % 2 == 0, K % 8 == 0, N % 4 == 0). The ratio is exactly 2.
ThroughputReport throughput_report(int m, int k, int n);

} // namespace mmla
