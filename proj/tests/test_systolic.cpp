#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "mmla/systolic.hpp"
#include "oracles.hpp"

using namespace mmla;

TEST_CASE("1x1 array on a 1x1x1 problem") {
    I8Matrix a(1, 1, {5});
    I8Matrix b(1, 1, {-3});
    SaConfig cfg{1, 1, SaPeMode::Symmetric, AccMode::Wrapping, false, false};
    SaTrace t = simulate(a, b, cfg);
    CHECK(t.cycles == 1);
    CHECK(t.macs_performed == 1);
    CHECK(t.out32(0, 0) == -15);
    CHECK(analytic_cycles(1, 1, 1, cfg) == 1);
}

TEST_CASE("single tile fill+drain cycle count") {
    std::mt19937_64 rng(1);
    for (auto [rows, cols, k] : {std::tuple{4, 4, 8}, {2, 3, 5}, {8, 8, 16}}) {
        SaConfig cfg{rows, cols, SaPeMode::Symmetric, AccMode::Wrapping, false, false};
        I8Matrix a = oracle::random_i8(rng, rows, k);
        I8Matrix b = oracle::random_i8(rng, k, cols);
        SaTrace t = simulate(a, b, cfg);
        CHECK(t.cycles == static_cast<std::uint64_t>(k + rows + cols - 2));
        CHECK(t.passes == 1);
        CHECK(t.out32 == gemm_symmetric(a, b).values);
    }
}

TEST_CASE("analytic cycles match simulation across a shape grid") {
    std::mt19937_64 rng(2);
    for (SaPeMode mode : {SaPeMode::Symmetric, SaPeMode::AsymmetricDual}) {
        for (auto [m, k, n] : {std::tuple{4, 8, 4}, {7, 5, 9}, {12, 16, 20}, {1, 3, 2}}) {
            SaConfig cfg{4, 4, mode, AccMode::Wrapping, false, false};
            SaTrace t;
            if (mode == SaPeMode::Symmetric)
                t = simulate(oracle::random_i8(rng, m, k), oracle::random_i8(rng, k, n), cfg);
            else
                t = simulate(oracle::random_i8(rng, m, k), oracle::random_i4(rng, k, n), cfg);
            CHECK(t.cycles == analytic_cycles(m, k, n, cfg));
        }
    }
}

TEST_CASE("dual mode halves the column sweep at equal cycle formula") {
    SaConfig sym{4, 4, SaPeMode::Symmetric, AccMode::Wrapping, false, false};
    SaConfig dual{4, 4, SaPeMode::AsymmetricDual, AccMode::Wrapping, false, false};
    CHECK(analytic_cycles(4, 8, 4, sym) == 14);  // 8 + 4 + 4 - 2
    CHECK(analytic_cycles(4, 8, 4, dual) == 14); // one pass covers 8 output columns
    CHECK(analytic_cycles(8, 16, 16, sym) == 2 * analytic_cycles(8, 16, 16, dual));
}

TEST_CASE("dual mode performs twice the MACs on a single-pass problem") {
    std::mt19937_64 rng(3);
    I8Matrix a = oracle::random_i8(rng, 4, 8);
    I4MatrixPacked b4 = oracle::random_i4(rng, 8, 4);
    I8Matrix b8 = widen_int4_to_int8(b4);

    SaConfig sym{4, 4, SaPeMode::Symmetric, AccMode::Wrapping, false, false};
    SaConfig dual{4, 4, SaPeMode::AsymmetricDual, AccMode::Wrapping, false, false};
    SaTrace ts = simulate(a, b8, sym);
    SaTrace td = simulate(a, b4, dual);
    CHECK(ts.cycles == td.cycles);
    CHECK(td.macs_performed == 2 * ts.macs_performed);
}

TEST_CASE("dual mode matches symmetric outputs at half the N-sweep cycles") {
    std::mt19937_64 rng(8);
    I8Matrix a = oracle::random_i8(rng, 8, 16, -4, 4);
    I4MatrixPacked b4 = oracle::random_i4(rng, 16, 8);
    I8Matrix b8 = widen_int4_to_int8(b4);

    SaConfig sym{4, 4, SaPeMode::Symmetric, AccMode::Wrapping, false, false};
    SaConfig dual{4, 4, SaPeMode::AsymmetricDual, AccMode::Wrapping, false, false};
    SaTrace ts = simulate(a, b8, sym);
    SaTrace td = simulate(a, b4, dual);

    // small operands keep the exact result in int16, so the int32 and int16
    // accumulators hold the same mathematical values
    for (int r = 0; r < 8; ++r)
        for (int c = 0; c < 8; ++c) CHECK(ts.out32(r, c) == td.out16(r, c));
    CHECK(ts.cycles == 2 * td.cycles);
}

TEST_CASE("simulation matches the GEMM kernels bit-exactly") {
    std::mt19937_64 rng(4);
    for (int iter = 0; iter < 30; ++iter) {
        int m = 1 + static_cast<int>(rng() % 12);
        int k = 1 + static_cast<int>(rng() % 24);
        int n = 1 + static_cast<int>(rng() % 12);
        int rows = 1 + static_cast<int>(rng() % 6);
        int cols = 1 + static_cast<int>(rng() % 6);
        AccMode acc = iter % 2 == 0 ? AccMode::Wrapping : AccMode::ExactTracking;

        I8Matrix a = oracle::random_i8(rng, m, k);
        I4MatrixPacked b4 = oracle::random_i4(rng, k, n);
        I8Matrix b8 = widen_int4_to_int8(b4);

        SaConfig sym{rows, cols, SaPeMode::Symmetric, acc, false, false};
        CHECK(simulate(a, b8, sym).out32 == gemm_symmetric(a, b8, acc).values);

        SaConfig dual{rows, cols, SaPeMode::AsymmetricDual, acc, false, false};
        CHECK(simulate(a, b4, dual).out16 == gemm_asymmetric(a, b4, acc).values);
    }
}

TEST_CASE("saturating mode agrees with the kernel when nothing saturates") {
    std::mt19937_64 rng(5);
    I8Matrix a = oracle::random_i8(rng, 6, 16, -4, 4);
    I4MatrixPacked b = oracle::random_i4(rng, 16, 6, -3, 3);
    SaConfig cfg{3, 3, SaPeMode::AsymmetricDual, AccMode::SaturatingSticky, false, false};
    SaTrace t = simulate(a, b, cfg);
    auto g = gemm_asymmetric(a, b, AccMode::SaturatingSticky);
    CHECK(t.out16 == g.values);
    for (auto s : t.sticky.data) CHECK(s == 0);
}

TEST_CASE("per-PE sticky saturation latches in the array") {
    I8Matrix a(1, 48, std::vector<std::int8_t>(48, 127));
    I4MatrixPacked b(48, 1);
    for (int r = 0; r < 48; ++r) b.set(r, 0, -8);
    SaConfig cfg{1, 1, SaPeMode::AsymmetricDual, AccMode::SaturatingSticky, false, false};
    SaTrace t = simulate(a, b, cfg);
    CHECK(t.out16(0, 0) == -32768);
    CHECK(t.sticky(0, 0) == 1);
}

TEST_CASE("operand movement is one hop per cycle") {
    std::mt19937_64 rng(6);
    I8Matrix a = oracle::random_i8(rng, 4, 6);
    I8Matrix b = oracle::random_i8(rng, 6, 4);
    SaConfig cfg{4, 4, SaPeMode::Symmetric, AccMode::Wrapping, true, true};
    SaTrace t = simulate(a, b, cfg);
    REQUIRE(t.operand_frames.size() == t.cycles);
    for (std::size_t f = 1; f < t.operand_frames.size(); ++f) {
        const OperandFrame& prev = t.operand_frames[f - 1];
        const OperandFrame& cur = t.operand_frames[f];
        for (int r = 0; r < 4; ++r)
            for (int c = 1; c < 4; ++c) {
                CHECK(cur.a(r, c) == prev.a(r, c - 1));
                CHECK(cur.a_valid(r, c) == prev.a_valid(r, c - 1));
            }
        for (int r = 1; r < 4; ++r)
            for (int c = 0; c < 4; ++c) {
                CHECK(cur.b(r, c) == prev.b(r - 1, c));
                CHECK(cur.b_valid(r, c) == prev.b_valid(r - 1, c));
            }
    }
}

TEST_CASE("macs_performed equals the per-cycle activity sum") {
    std::mt19937_64 rng(7);
    for (SaPeMode mode : {SaPeMode::Symmetric, SaPeMode::AsymmetricDual}) {
        SaConfig cfg{3, 5, mode, AccMode::Wrapping, true, false};
        I8Matrix a = oracle::random_i8(rng, 7, 11);
        SaTrace t;
        if (mode == SaPeMode::Symmetric)
            t = simulate(a, oracle::random_i8(rng, 11, 9), cfg);
        else
            t = simulate(a, oracle::random_i4(rng, 11, 9), cfg);
        std::uint64_t total = 0;
        for (auto active : t.active_pes_per_cycle)
            total += static_cast<std::uint64_t>(active) *
                     (mode == SaPeMode::AsymmetricDual ? 2 : 1);
        CHECK(total == t.macs_performed);
    }
}

TEST_CASE("accumulator footprint is 32 bits per PE in both modes") {
    static_assert(sizeof(PeState{}.acc32) == 4);
    static_assert(sizeof(PeState{}.acc16) == 4);
    CHECK(true);
}

TEST_CASE("throughput_compare steady state ratio is exactly 2") {
    SaThroughput t = throughput_compare(8, 32, 16, 4, 4);
    REQUIRE(t.steady_state);
    CHECK(t.sym_macs_per_cycle == 16.0);
    CHECK(t.asym_macs_per_cycle == 32.0);
    CHECK(t.ratio == 2.0);
}

TEST_CASE("throughput_compare reports fill/drain-dominated problems honestly") {
    SaThroughput t = throughput_compare(1, 1, 1, 4, 4);
    CHECK(t.total_ratio < 2.0);
    CHECK_THROWS_AS(throughput_compare(0, 1, 1, 4, 4), ShapeError);
}

TEST_CASE("mode mismatch and shape errors") {
    I8Matrix a(2, 8);
    I8Matrix b8(8, 2);
    I4MatrixPacked b4(8, 2);
    SaConfig sym{2, 2, SaPeMode::Symmetric, AccMode::Wrapping, false, false};
    SaConfig dual{2, 2, SaPeMode::AsymmetricDual, AccMode::Wrapping, false, false};
    CHECK_THROWS_AS(simulate(a, b4, sym), ModeMismatchError);
    CHECK_THROWS_AS(simulate(a, b8, dual), ModeMismatchError);
    CHECK_THROWS_AS(simulate(a, I8Matrix(9, 2), sym), ShapeError);
    CHECK_THROWS_AS(simulate(I8Matrix(0, 0), b8, sym), ShapeError);
}
