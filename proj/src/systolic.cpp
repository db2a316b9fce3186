#include "mmla/systolic.hpp"

namespace mmla {

namespace {

struct BInject {
    std::uint8_t byte = 0;
    bool valid = false;
};

// Streams one output tile's worth of operands through the array.
// inject_a(r, k) / inject_b(c, k) supply boundary values for reduction index
// k; values outside [0, K) are zero and invalid.
class PassRunner {
public:
    PassRunner(const SaConfig& cfg, int k_depth, SaTrace& trace)
        : cfg_(cfg), k_depth_(k_depth), trace_(trace),
          grid_(static_cast<std::size_t>(cfg.rows) * cfg.cols) {}

    PeState& pe(int r, int c) { return grid_[static_cast<std::size_t>(r) * cfg_.cols + c]; }

    template <typename InjectA, typename InjectB>
    void run(InjectA&& inject_a, InjectB&& inject_b) {
        const int rows = cfg_.rows, cols = cfg_.cols;
        const int pass_cycles = k_depth_ + rows + cols - 2;
        const int mac_factor = cfg_.pe_mode == SaPeMode::AsymmetricDual ? 2 : 1;

        for (int t = 0; t < pass_cycles; ++t) {
            // Shift right/down by one hop; edge registers take injected values.
            for (int r = 0; r < rows; ++r)
                for (int c = cols - 1; c > 0; --c) {
                    pe(r, c).a_reg = pe(r, c - 1).a_reg;
                    pe(r, c).a_valid = pe(r, c - 1).a_valid;
                }
            for (int c = 0; c < cols; ++c)
                for (int r = rows - 1; r > 0; --r) {
                    pe(r, c).b_reg = pe(r - 1, c).b_reg;
                    pe(r, c).b_valid = pe(r - 1, c).b_valid;
                }
            for (int r = 0; r < rows; ++r) {
                int k = t - r;
                bool valid = k >= 0 && k < k_depth_;
                pe(r, 0).a_reg = valid ? inject_a(r, k) : 0;
                pe(r, 0).a_valid = valid;
            }
            for (int c = 0; c < cols; ++c) {
                int k = t - c;
                BInject in = k >= 0 && k < k_depth_ ? inject_b(c, k) : BInject{};
                pe(0, c).b_reg = in.byte;
                pe(0, c).b_valid = in.valid;
            }

            std::uint32_t active = 0;
            for (int r = 0; r < rows; ++r)
                for (int c = 0; c < cols; ++c) {
                    PeState& p = pe(r, c);
                    if (!(p.a_valid && p.b_valid)) continue;
                    ++active;
                    step_pe(p);
                }
            trace_.macs_performed += static_cast<std::uint64_t>(active) * mac_factor;
            ++trace_.cycles;
            if (cfg_.record_activity) trace_.active_pes_per_cycle.push_back(active);
            if (cfg_.record_operands) record_frame();
        }
    }

private:
    void step_pe(PeState& p) {
        if (cfg_.pe_mode == SaPeMode::Symmetric) {
            std::int64_t value = p.acc32;
            detail::acc_step(value, p.exact[0], p.sticky[0], p.overflow_events[0],
                             static_cast<std::int64_t>(p.a_reg) *
                                 static_cast<std::int8_t>(p.b_reg),
                             cfg_.acc_mode, 32);
            p.acc32 = static_cast<std::int32_t>(value);
        } else {
            for (int half = 0; half < 2; ++half) {
                int w = decode_nibble(half == 0 ? p.b_reg : p.b_reg >> 4);
                std::int64_t value = p.acc16[half];
                detail::acc_step(value, p.exact[half], p.sticky[half],
                                 p.overflow_events[half],
                                 static_cast<std::int64_t>(p.a_reg) * w, cfg_.acc_mode, 16);
                p.acc16[half] = static_cast<std::int16_t>(value);
            }
        }
    }

    void record_frame() {
        OperandFrame f{I16Matrix(cfg_.rows, cfg_.cols), U8Matrix(cfg_.rows, cfg_.cols),
                       I16Matrix(cfg_.rows, cfg_.cols), U8Matrix(cfg_.rows, cfg_.cols)};
        for (int r = 0; r < cfg_.rows; ++r)
            for (int c = 0; c < cfg_.cols; ++c) {
                const PeState& p = pe(r, c);
                f.a(r, c) = p.a_reg;
                f.a_valid(r, c) = p.a_valid;
                f.b(r, c) = p.b_reg;
                f.b_valid(r, c) = p.b_valid;
            }
        trace_.operand_frames.push_back(std::move(f));
    }

    const SaConfig& cfg_;
    int k_depth_;
    SaTrace& trace_;
    std::vector<PeState> grid_;
};

void check_problem(const SaConfig& cfg, int m, int k, int n) {
    if (cfg.rows < 1 || cfg.cols < 1) throw ShapeError("array dims must be positive");
    if (m < 1 || k < 1 || n < 1) throw ShapeError("problem dims must be positive");
}

} // namespace

SaTrace simulate(const I8Matrix& a, const I8Matrix& b, const SaConfig& cfg) {
    if (cfg.pe_mode != SaPeMode::Symmetric)
        throw ModeMismatchError("int8 weights require Symmetric pe_mode");
    if (a.cols != b.rows) throw ShapeError("inner dimensions do not conform");
    check_problem(cfg, a.rows, a.cols, b.cols);

    const int M = a.rows, K = a.cols, N = b.cols;
    const int tiles_m = (M + cfg.rows - 1) / cfg.rows;
    const int tiles_n = (N + cfg.cols - 1) / cfg.cols;

    SaTrace trace;
    trace.pe_mode = cfg.pe_mode;
    trace.out32 = I32Matrix(M, N);

    for (int tm = 0; tm < tiles_m; ++tm)
        for (int tn = 0; tn < tiles_n; ++tn) {
            const int m0 = tm * cfg.rows, n0 = tn * cfg.cols;
            PassRunner pass(cfg, K, trace);
            pass.run(
                [&](int r, int k) -> std::int8_t {
                    return m0 + r < M ? a(m0 + r, k) : std::int8_t{0};
                },
                [&](int c, int k) -> BInject {
                    std::int8_t w = n0 + c < N ? b(k, n0 + c) : std::int8_t{0};
                    return {static_cast<std::uint8_t>(w), true};
                });
            ++trace.passes;
            for (int r = 0; r < cfg.rows && m0 + r < M; ++r)
                for (int c = 0; c < cfg.cols && n0 + c < N; ++c) {
                    trace.out32(m0 + r, n0 + c) = pass.pe(r, c).acc32;
                    trace.overflow_events += pass.pe(r, c).overflow_events[0];
                }
        }
    return trace;
}

SaTrace simulate(const I8Matrix& a, const I4MatrixPacked& b, const SaConfig& cfg) {
    if (cfg.pe_mode != SaPeMode::AsymmetricDual)
        throw ModeMismatchError("int4 weights require AsymmetricDual pe_mode");
    if (a.cols != b.rows) throw ShapeError("inner dimensions do not conform");
    check_problem(cfg, a.rows, a.cols, b.cols);

    const int M = a.rows, K = a.cols, N = b.cols;
    const int cover = 2 * cfg.cols; // two output columns per PE column
    const int tiles_m = (M + cfg.rows - 1) / cfg.rows;
    const int tiles_n = (N + cover - 1) / cover;

    SaTrace trace;
    trace.pe_mode = cfg.pe_mode;
    trace.out16 = I16Matrix(M, N);
    trace.sticky = U8Matrix(M, N);

    for (int tm = 0; tm < tiles_m; ++tm)
        for (int tn = 0; tn < tiles_n; ++tn) {
            const int m0 = tm * cfg.rows, n0 = tn * cover;
            PassRunner pass(cfg, K, trace);
            pass.run(
                [&](int r, int k) -> std::int8_t {
                    return m0 + r < M ? a(m0 + r, k) : std::int8_t{0};
                },
                [&](int c, int k) -> BInject {
                    int c0 = n0 + 2 * c, c1 = c0 + 1;
                    std::uint8_t lo = c0 < N ? encode_nibble(b.get(k, c0)) : 0;
                    std::uint8_t hi = c1 < N ? encode_nibble(b.get(k, c1)) : 0;
                    return {static_cast<std::uint8_t>(lo | hi << 4), true};
                });
            ++trace.passes;
            for (int r = 0; r < cfg.rows && m0 + r < M; ++r)
                for (int c = 0; c < cfg.cols; ++c)
                    for (int half = 0; half < 2; ++half) {
                        int oc = n0 + 2 * c + half;
                        if (oc >= N) continue;
                        const PeState& p = pass.pe(r, c);
                        trace.out16(m0 + r, oc) = p.acc16[half];
                        trace.sticky(m0 + r, oc) = p.sticky[half];
                        trace.overflow_events += p.overflow_events[half];
                    }
        }
    return trace;
}

std::uint64_t analytic_cycles(int m, int k, int n, const SaConfig& cfg) {
    check_problem(cfg, m, k, n);
    const int cover = cfg.pe_mode == SaPeMode::AsymmetricDual ? 2 * cfg.cols : cfg.cols;
    const std::uint64_t tiles_m = (m + cfg.rows - 1) / cfg.rows;
    const std::uint64_t tiles_n = (n + cover - 1) / cover;
    return tiles_m * tiles_n * static_cast<std::uint64_t>(k + cfg.rows + cfg.cols - 2);
}

SaThroughput throughput_compare(int m, int k, int n, int rows, int cols) {
    SaConfig sym_cfg{rows, cols, SaPeMode::Symmetric, AccMode::Wrapping, true, false};
    SaConfig asym_cfg{rows, cols, SaPeMode::AsymmetricDual, AccMode::Wrapping, true, false};
    check_problem(sym_cfg, m, k, n);

    // Operand values do not affect timing; zeros keep this cheap.
    I8Matrix a(m, k);
    I8Matrix b8(k, n);
    I4MatrixPacked b4(k, n);

    SaTrace sym = simulate(a, b8, sym_cfg);
    SaTrace asym = simulate(a, b4, asym_cfg);

    auto steady_macs_per_cycle = [&](const SaTrace& t, int factor) -> double {
        const std::uint32_t full = static_cast<std::uint32_t>(rows) * cols;
        std::uint64_t cycles = 0;
        std::uint64_t macs = 0;
        for (auto active : t.active_pes_per_cycle)
            if (active == full) {
                ++cycles;
                macs += static_cast<std::uint64_t>(active) * factor;
            }
        return cycles == 0 ? 0.0 : static_cast<double>(macs) / static_cast<double>(cycles);
    };

    SaThroughput r;
    r.sym_macs_per_cycle = steady_macs_per_cycle(sym, 1);
    r.asym_macs_per_cycle = steady_macs_per_cycle(asym, 2);
    r.steady_state = r.sym_macs_per_cycle > 0.0 && r.asym_macs_per_cycle > 0.0;
    r.ratio = r.steady_state ? r.asym_macs_per_cycle / r.sym_macs_per_cycle : 0.0;

    const double useful = static_cast<double>(m) * k * n;
    r.sym_total_macs_per_cycle = useful / static_cast<double>(sym.cycles);
    r.asym_total_macs_per_cycle = useful / static_cast<double>(asym.cycles);
    r.total_ratio = r.asym_total_macs_per_cycle / r.sym_total_macs_per_cycle;
    return r;
}

} // namespace mmla
