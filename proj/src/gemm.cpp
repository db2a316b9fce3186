#include "mmla/gemm.hpp"

#include <limits>
#include <vector>

namespace mmla {

namespace {

void check_conforming(int a_cols, int b_rows) {
    if (a_cols != b_rows) throw ShapeError("inner dimensions do not conform");
}

I32Matrix reference_product(const I8Matrix& a, const std::vector<int>& b_vals, int b_rows,
                            int b_cols) {
    check_conforming(a.cols, b_rows);
    I32Matrix c(a.rows, b_cols);
    for (int i = 0; i < a.rows; ++i)
        for (int j = 0; j < b_cols; ++j) {
            std::int64_t sum = 0;
            for (int k = 0; k < a.cols; ++k)
                sum += static_cast<std::int64_t>(a(i, k)) * b_vals[static_cast<std::size_t>(k) * b_cols + j];
            if (sum > std::numeric_limits<std::int32_t>::max() ||
                sum < std::numeric_limits<std::int32_t>::min())
                throw RangeError("reference product exceeds int32");
            c(i, j) = static_cast<std::int32_t>(sum);
        }
    return c;
}

} // namespace

I32Matrix gemm_reference(const I8Matrix& a, const I8Matrix& b) {
    std::vector<int> vals(b.data.begin(), b.data.end());
    return reference_product(a, vals, b.rows, b.cols);
}

I32Matrix gemm_reference(const I8Matrix& a, const I4MatrixPacked& b) {
    return reference_product(a, unpack_int4(b), b.rows, b.cols);
}

SymGemmResult gemm_symmetric(const I8Matrix& a, const I8Matrix& b, AccMode mode) {
    check_conforming(a.cols, b.rows);
    const int M = a.rows, N = b.cols;
    I8Matrix ap = pad_to_multiple(a, 2, 8);
    I8Matrix bp = pad_to_multiple(b, 8, 2);
    const int row_pairs = ap.rows / 2, k_blocks = ap.cols / 8, col_pairs = bp.cols / 2;

    std::vector<AccTile32> tiles(static_cast<std::size_t>(row_pairs) * col_pairs);
    GemmCounters counters;

    std::vector<OperandRegB8> b_regs(col_pairs);
    for (int kb = 0; kb < k_blocks; ++kb) {
        for (int cb = 0; cb < col_pairs; ++cb) b_regs[cb] = extract_reg_b8(bp, kb, cb);
        counters.load_ops += static_cast<std::uint64_t>(col_pairs);
        for (int rp = 0; rp < row_pairs; ++rp) {
            OperandRegA a_reg = extract_reg_a(ap, rp, kb);
            ++counters.load_ops;
            for (int cb = 0; cb < col_pairs; ++cb) {
                AccTile32& tile = tiles[static_cast<std::size_t>(rp) * col_pairs + cb];
                tile = smmla(tile, a_reg, b_regs[cb], mode);
                ++counters.mac_instructions;
            }
        }
    }
    counters.macs = counters.mac_instructions * 32;
    counters.output_elements = static_cast<std::uint64_t>(M) * N;

    SymGemmResult res{I32Matrix(M, N), U8Matrix(M, N), U32Matrix(M, N), counters};
    for (int rp = 0; rp < row_pairs; ++rp)
        for (int cb = 0; cb < col_pairs; ++cb) {
            const AccTile32& tile = tiles[static_cast<std::size_t>(rp) * col_pairs + cb];
            for (int i = 0; i < 2; ++i)
                for (int j = 0; j < 2; ++j) {
                    int r = 2 * rp + i, c = 2 * cb + j;
                    if (r >= M || c >= N) continue;
                    res.values(r, c) = tile.acc[i][j];
                    res.sticky(r, c) = tile.sticky[i][j];
                    res.overflow_events(r, c) = tile.overflow_events[i][j];
                }
        }
    return res;
}

AsymGemmResult gemm_asymmetric(const I8Matrix& a, const I4MatrixPacked& b, AccMode mode) {
    check_conforming(a.cols, b.rows);
    const int M = a.rows, N = b.cols;
    I8Matrix ap = pad_to_multiple(a, 2, 8);
    I4MatrixPacked bp = pad_to_multiple(b, 8, 4);
    const int row_pairs = ap.rows / 2, k_blocks = ap.cols / 8, col_blocks = bp.cols / 4;

    std::vector<AccTile16> tiles(static_cast<std::size_t>(row_pairs) * col_blocks);
    GemmCounters counters;

    std::vector<OperandRegB4> b_regs(col_blocks);
    for (int kb = 0; kb < k_blocks; ++kb) {
        for (int cb = 0; cb < col_blocks; ++cb) b_regs[cb] = extract_reg_b4(bp, kb, cb);
        counters.load_ops += static_cast<std::uint64_t>(col_blocks);
        for (int rp = 0; rp < row_pairs; ++rp) {
            OperandRegA a_reg = extract_reg_a(ap, rp, kb);
            ++counters.load_ops;
            for (int cb = 0; cb < col_blocks; ++cb) {
                AccTile16& tile = tiles[static_cast<std::size_t>(rp) * col_blocks + cb];
                tile = ammla(tile, a_reg, b_regs[cb], mode);
                ++counters.mac_instructions;
            }
        }
    }
    counters.macs = counters.mac_instructions * 64;
    counters.output_elements = static_cast<std::uint64_t>(M) * N;

    AsymGemmResult res;
    res.values = I16Matrix(M, N);
    res.sticky = U8Matrix(M, N);
    res.overflow_events = U32Matrix(M, N);
    res.counters = counters;
    res.total_steps = static_cast<std::uint64_t>(M) * N * k_blocks;
    for (int rp = 0; rp < row_pairs; ++rp)
        for (int cb = 0; cb < col_blocks; ++cb) {
            const AccTile16& tile = tiles[static_cast<std::size_t>(rp) * col_blocks + cb];
            for (int i = 0; i < 2; ++i)
                for (int j = 0; j < 4; ++j) {
                    int r = 2 * rp + i, c = 4 * cb + j;
                    if (r >= M || c >= N) continue;
                    res.values(r, c) = tile.acc[i][j];
                    res.sticky(r, c) = tile.sticky[i][j];
                    res.overflow_events(r, c) = tile.overflow_events[i][j];
                    res.overflow_steps += tile.overflow_events[i][j];
                }
        }
    return res;
}

std::uint64_t TrackedGemmResult::overflow_steps_at_width(int bits) const {
    std::uint64_t n = 0;
    for (int b = bits + 1; b < static_cast<int>(needed_width_histogram.size()); ++b)
        n += needed_width_histogram[b];
    return n;
}

TrackedGemmResult gemm_asymmetric_tracked(const I8Matrix& a, const I4MatrixPacked& b,
                                          int acc_bits) {
    if (acc_bits < 8 || acc_bits > 32)
        throw WidthError("accumulator width must be in [8, 32]");
    check_conforming(a.cols, b.rows);
    const int M = a.rows, N = b.cols;
    I8Matrix ap = pad_to_multiple(a, 2, 8);
    I4MatrixPacked bp = pad_to_multiple(b, 8, 4);
    const int Mp = ap.rows, Kp = ap.cols, Np = bp.cols;
    const int row_pairs = Mp / 2, k_blocks = Kp / 8, col_blocks = Np / 4;
    const std::int64_t hi = (std::int64_t{1} << (acc_bits - 1)) - 1;
    const std::int64_t lo = -(std::int64_t{1} << (acc_bits - 1));

    // Same dot products and iteration order as the AccTile16 path, kept as
    // flat element state so the accumulator width can vary.
    std::vector<std::int8_t> w = widen_int4_to_int8(bp).data;
    std::vector<std::int64_t> exact(static_cast<std::size_t>(Mp) * Np, 0);

    TrackedGemmResult res;
    res.values = I32Matrix(M, N);
    res.overflow_events = U32Matrix(M, N);
    res.counters.mac_instructions =
        static_cast<std::uint64_t>(row_pairs) * k_blocks * col_blocks;
    res.counters.load_ops = static_cast<std::uint64_t>(k_blocks) * (row_pairs + col_blocks);
    res.counters.macs = res.counters.mac_instructions * 64;
    res.counters.output_elements = static_cast<std::uint64_t>(M) * N;

    for (int kb = 0; kb < k_blocks; ++kb) {
        const int k0 = 8 * kb;
        for (int rp = 0; rp < row_pairs; ++rp) {
            for (int cb = 0; cb < col_blocks; ++cb) {
                for (int i = 0; i < 2; ++i) {
                    const int r = 2 * rp + i;
                    const std::int8_t* arow = &ap.data[static_cast<std::size_t>(r) * Kp + k0];
                    for (int j = 0; j < 4; ++j) {
                        const int c = 4 * cb + j;
                        std::int32_t dot = 0;
                        const std::int8_t* wcol = &w[static_cast<std::size_t>(k0) * Np + c];
                        for (int k = 0; k < 8; ++k)
                            dot += static_cast<std::int32_t>(arow[k]) *
                                   wcol[static_cast<std::size_t>(k) * Np];
                        std::int64_t& e = exact[static_cast<std::size_t>(r) * Np + c];
                        e += dot;
                        if (r < M && c < N) {
                            ++res.total_steps;
                            int need = detail::bits_needed(e);
                            ++res.needed_width_histogram[need];
                            if (e < lo || e > hi) {
                                ++res.overflow_steps;
                                ++res.overflow_events(r, c);
                            }
                        }
                    }
                }
            }
        }
    }
    for (int r = 0; r < M; ++r)
        for (int c = 0; c < N; ++c)
            res.values(r, c) = static_cast<std::int32_t>(
                detail::wrap_signed(exact[static_cast<std::size_t>(r) * Np + c], acc_bits));
    return res;
}

WidenedGemmResult gemm_asymmetric_via_widening(const I8Matrix& a, const I4MatrixPacked& b,
                                               AccMode mode) {
    check_conforming(a.cols, b.rows);
    const int M = a.rows, N = b.cols;
    I8Matrix ap = pad_to_multiple(a, 2, 8);
    I4MatrixPacked bp = pad_to_multiple(b, 8, 2);
    const int row_pairs = ap.rows / 2, k_blocks = ap.cols / 8, col_pairs = bp.cols / 2;

    std::vector<AccTile32> tiles(static_cast<std::size_t>(row_pairs) * col_pairs);
    GemmCounters counters;

    for (int kb = 0; kb < k_blocks; ++kb) {
        counters.load_ops += static_cast<std::uint64_t>(col_pairs);
        for (int rp = 0; rp < row_pairs; ++rp) {
            OperandRegA a_reg = extract_reg_a(ap, rp, kb);
            ++counters.load_ops;
            for (int cb = 0; cb < col_pairs; ++cb) {
                AccTile32& tile = tiles[static_cast<std::size_t>(rp) * col_pairs + cb];
                tile = ammla_via_widening(tile, a_reg, bp, kb, cb, mode);
                ++counters.mac_instructions;
            }
        }
    }
    counters.macs = counters.mac_instructions * 32;
    counters.output_elements = static_cast<std::uint64_t>(M) * N;

    WidenedGemmResult res{I32Matrix(M, N), U8Matrix(M, N), U32Matrix(M, N), counters};
    for (int rp = 0; rp < row_pairs; ++rp)
        for (int cb = 0; cb < col_pairs; ++cb) {
            const AccTile32& tile = tiles[static_cast<std::size_t>(rp) * col_pairs + cb];
            for (int i = 0; i < 2; ++i)
                for (int j = 0; j < 2; ++j) {
                    int r = 2 * rp + i, c = 2 * cb + j;
                    if (r >= M || c >= N) continue;
                    res.values(r, c) = tile.acc[i][j];
                    res.sticky(r, c) = tile.sticky[i][j];
                    res.overflow_events(r, c) = tile.overflow_events[i][j];
                }
        }
    return res;
}

I8Matrix im2col(std::span<const std::int8_t> input_chw, const ConvLayerSpec& spec) {
    if (spec.c_in < 1 || spec.kw < 1 || spec.kh < 1 || spec.in_w < 1 || spec.in_h < 1 ||
        spec.stride < 1 || spec.padding < 0)
        throw ShapeError("invalid convolution spec");
    if (input_chw.size() !=
        static_cast<std::size_t>(spec.c_in) * spec.in_h * spec.in_w)
        throw ShapeError("input tensor size does not match c_in*in_h*in_w");
    const int out_h = spec.out_h(), out_w = spec.out_w();
    if (out_h < 1 || out_w < 1) throw ShapeError("kernel does not fit input");

    I8Matrix out(out_h * out_w, spec.reduction_depth());
    for (int oy = 0; oy < out_h; ++oy)
        for (int ox = 0; ox < out_w; ++ox) {
            int row = oy * out_w + ox;
            for (int ci = 0; ci < spec.c_in; ++ci)
                for (int ky = 0; ky < spec.kh; ++ky)
                    for (int kx = 0; kx < spec.kw; ++kx) {
                        int iy = oy * spec.stride + ky - spec.padding;
                        int ix = ox * spec.stride + kx - spec.padding;
                        std::int8_t v = 0;
                        if (iy >= 0 && iy < spec.in_h && ix >= 0 && ix < spec.in_w)
                            v = input_chw[static_cast<std::size_t>(ci) * spec.in_h * spec.in_w +
                                          static_cast<std::size_t>(iy) * spec.in_w + ix];
                        out(row, (ci * spec.kh + ky) * spec.kw + kx) = v;
                    }
        }
    return out;
}

ThroughputReport throughput_report(int m, int k, int n) {
    if (m < 2 || k < 8 || n < 4 || m % 2 != 0 || k % 8 != 0 || n % 4 != 0)
        throw ShapeError("dims must be positive multiples of (2, 8, 4)");
    ThroughputReport r;
    r.sym_instructions = static_cast<std::uint64_t>(m / 2) * (k / 8) * (n / 2);
    r.asym_instructions = static_cast<std::uint64_t>(m / 2) * (k / 8) * (n / 4);
    r.ratio = static_cast<double>(r.sym_instructions) / static_cast<double>(r.asym_instructions);
    return r;
}

} // namespace mmla
