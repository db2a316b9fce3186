#pragma once

#include <cstdint>
#include <vector>

#include "mmla/gemm.hpp"

namespace mmla {

enum class SaPeMode {
    Symmetric,      // one int8 x int8 MAC into a 32-bit accumulator per cycle
    AsymmetricDual, // two int8 x int4 MACs into two 16-bit halves per cycle
};

struct SaConfig {
    int rows = 4;
    int cols = 4;
    SaPeMode pe_mode = SaPeMode::Symmetric;
    AccMode acc_mode = AccMode::Wrapping;
    bool record_activity = false; // per-cycle active-PE counts
    bool record_operands = false; // per-cycle operand register snapshots
};

/// One processing element. The B-side register is one byte: an int8 weight in
/// Symmetric mode, or two packed int4 weights in AsymmetricDual mode. The two
/// 16-bit accumulator halves occupy the same 32-bit footprint as the
/// symmetric accumulator.
struct PeState {
    std::int8_t a_reg = 0;
    std::uint8_t b_reg = 0;
    bool a_valid = false;
    bool b_valid = false;
    std::int32_t acc32 = 0;
    std::array<std::int16_t, 2> acc16{};
    std::array<std::uint8_t, 2> sticky{};
    std::array<std::int64_t, 2> exact{};
    std::array<std::uint32_t, 2> overflow_events{};
};

/// Per-cycle operand snapshot, recorded when cfg.record_operands is set.
struct OperandFrame {
    I16Matrix a;        // a_reg per PE (widened for uniform storage)
    U8Matrix a_valid;
    I16Matrix b;        // b_reg byte per PE
    U8Matrix b_valid;
};

struct SaTrace {
    SaPeMode pe_mode = SaPeMode::Symmetric;
    std::uint64_t cycles = 0;
    std::uint64_t macs_performed = 0;   // hardware MACs: 2 per active PE-cycle in dual mode
    std::uint64_t overflow_events = 0;  // ExactTracking total
    std::uint64_t passes = 0;
    I32Matrix out32; // Symmetric output
    I16Matrix out16; // AsymmetricDual output
    U8Matrix sticky; // AsymmetricDual sticky map
    std::vector<std::uint32_t> active_pes_per_cycle; // when record_activity
    std::vector<OperandFrame> operand_frames;        // when record_operands
};

/// Output-stationary simulation of C = A x B on a rows x cols array.
/// A streams left to right, B top to bottom, each skewed by one cycle per
/// row/column; all movement is one register-to-register hop per cycle.
/// Accumulators stay in place; each (m,n) output tile takes one pass of
/// K + rows + cols - 2 cycles. The AsymmetricDual array covers two output
/// columns per PE column. Throws ModeMismatchError when the operand type
/// does not match cfg.pe_mode.
SaTrace simulate(const I8Matrix& a, const I8Matrix& b, const SaConfig& cfg);
SaTrace simulate(const I8Matrix& a, const I4MatrixPacked& b, const SaConfig& cfg);

/// Closed-form cycle prediction: tiles_M * tiles_N passes of
/// (K + rows + cols - 2) cycles, where AsymmetricDual halves tiles_N.
std::uint64_t analytic_cycles(int m, int k, int n, const SaConfig& cfg);

struct SaThroughput {
    // Steady state: cycles where every PE is active (fill/drain excluded).
    double sym_macs_per_cycle = 0.0;
    double asym_macs_per_cycle = 0.0;
    double ratio = 0.0;
    bool steady_state = false; // whether any all-active cycle exists in both runs
    // Whole run: useful MACs (M*K*N) over total cycles, fill/drain included.
    double sym_total_macs_per_cycle = 0.0;
    double asym_total_macs_per_cycle = 0.0;
    double total_ratio = 0.0;
};

/// Runs the same logical GEMM through both PE modes and reports MAC
/// throughput with and without fill/drain. Throws ShapeError on empty dims.
SaThroughput throughput_compare(int m, int k, int n, int rows, int cols);

} // namespace mmla
