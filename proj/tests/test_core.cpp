#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <random>

#include "mmla/matrix.hpp"
#include "mmla/registers.hpp"
#include "mmla/tensor.hpp"
#include "oracles.hpp"

using namespace mmla;

TEST_CASE("pack_int4 nibble layout") {
    std::vector<int> zeros{0, 0, 0, 0};
    CHECK(pack_int4(zeros, 2, 2).data == std::vector<std::uint8_t>{0x00, 0x00});

    std::vector<int> pair{-8, 7};
    CHECK(pack_int4(pair, 1, 2).data == std::vector<std::uint8_t>{0x78});

    std::vector<int> odd{1, 2, 3};
    CHECK(pack_int4(odd, 1, 3).data == std::vector<std::uint8_t>{0x21, 0x03});

    std::vector<int> bad{8};
    CHECK_THROWS_AS(pack_int4(bad, 1, 1), RangeError);
    std::vector<int> neg{-9};
    CHECK_THROWS_AS(pack_int4(neg, 1, 1), RangeError);
    std::vector<int> mismatch{1, 2};
    CHECK_THROWS_AS(pack_int4(mismatch, 1, 3), ShapeError);
}

TEST_CASE("unpack_int4 sign extension") {
    I4MatrixPacked m(1, 2, {0xF8});
    CHECK(unpack_int4(m) == std::vector<int>{-8, -1});

    I4MatrixPacked zero(1, 1, {0x00});
    CHECK(unpack_int4(zero) == std::vector<int>{0});
}

TEST_CASE("pack/unpack roundtrip") {
    std::mt19937_64 rng(7);
    std::uniform_int_distribution<int> dim(1, 64), val(-8, 7);
    for (int iter = 0; iter < 50; ++iter) {
        int r = dim(rng), c = dim(rng);
        std::vector<int> vals(static_cast<std::size_t>(r) * c);
        for (auto& v : vals) v = val(rng);
        I4MatrixPacked packed = pack_int4(vals, r, c);
        CHECK(unpack_int4(packed) == vals);
        CHECK(pack_int4(unpack_int4(packed), r, c) == packed);
    }
    // exhaustive over nibble values for 1x2
    for (int a = -8; a <= 7; ++a)
        for (int b = -8; b <= 7; ++b) {
            std::vector<int> vals{a, b};
            I4MatrixPacked packed = pack_int4(vals, 1, 2);
            CHECK(unpack_int4(packed) == vals);
        }
}

TEST_CASE("odd element count keeps final high nibble zero") {
    std::mt19937_64 rng(11);
    std::uniform_int_distribution<int> val(-8, 7);
    std::vector<int> vals(15);
    for (auto& v : vals) v = val(rng);
    I4MatrixPacked m = pack_int4(vals, 3, 5);
    CHECK((m.data.back() & 0xF0) == 0);
    CHECK_THROWS_AS(I4MatrixPacked(1, 1, {0x10}), FormatError);
}

TEST_CASE("widen_int4_to_int8") {
    std::vector<int> pair{-8, 7};
    I8Matrix wide = widen_int4_to_int8(pack_int4(pair, 1, 2));
    CHECK(wide.data == std::vector<std::int8_t>{-8, 7});

    I4MatrixPacked zeros(8, 4);
    I8Matrix widez = widen_int4_to_int8(zeros);
    CHECK(widez.rows == 8);
    CHECK(widez.cols == 4);
    for (auto v : widez.data) CHECK(v == 0);

    // zero-extension reads the nibble unsigned
    std::vector<int> negs{-1, -8};
    I8Matrix z = widen_int4_to_int8(pack_int4(negs, 1, 2), Int4Extension::Zero);
    CHECK(z.data == std::vector<std::int8_t>{15, 8});

    // widen then narrow reproduces the matrix
    std::mt19937_64 rng(3);
    I4MatrixPacked m = oracle::random_i4(rng, 9, 7);
    I8Matrix w = widen_int4_to_int8(m);
    std::vector<int> back(w.data.begin(), w.data.end());
    CHECK(pack_int4(back, 9, 7) == m);
}

TEST_CASE("extract_reg_a windows") {
    I8Matrix m(4, 16);
    for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 16; ++c) m(r, c) = static_cast<std::int8_t>(r * 16 + c - 32);

    OperandRegA reg = extract_reg_a(m, 0, 0);
    for (int i = 0; i < 2; ++i)
        for (int k = 0; k < 8; ++k) CHECK(reg.a(i, k) == m(i, k));

    OperandRegA reg2 = extract_reg_a(m, 1, 1);
    for (int i = 0; i < 2; ++i)
        for (int k = 0; k < 8; ++k) CHECK(reg2.a(i, k) == m(2 + i, 8 + k));

    CHECK_THROWS_AS(extract_reg_a(m, 2, 0), BoundsError);
    CHECK_THROWS_AS(extract_reg_a(m, 0, 2), BoundsError);
}

TEST_CASE("extract_reg_b8 column-major lanes") {
    std::mt19937_64 rng(5);
    I8Matrix m = oracle::random_i8(rng, 16, 4);
    OperandRegB8 reg = extract_reg_b8(m, 1, 1);
    for (int k = 0; k < 8; ++k)
        for (int j = 0; j < 2; ++j) CHECK(reg.b(k, j) == m(8 + k, 2 + j));
    CHECK_THROWS_AS(extract_reg_b8(m, 2, 0), BoundsError);
}

TEST_CASE("extract_reg_b4 windows") {
    std::mt19937_64 rng(9);
    I4MatrixPacked m = oracle::random_i4(rng, 16, 8);

    OperandRegB4 reg = extract_reg_b4(m, 0, 0);
    for (int k = 0; k < 8; ++k)
        for (int j = 0; j < 4; ++j) CHECK(reg.w(k, j) == m.get(k, j));

    OperandRegB4 reg2 = extract_reg_b4(m, 1, 1);
    for (int k = 0; k < 8; ++k)
        for (int j = 0; j < 4; ++j) CHECK(reg2.w(k, j) == m.get(8 + k, 4 + j));

    CHECK_THROWS_AS(extract_reg_b4(m, 2, 0), BoundsError);
    CHECK_THROWS_AS(extract_reg_b4(m, 0, 2), BoundsError);
}

TEST_CASE("extraction is pure and scatter-back reproduces the window") {
    std::mt19937_64 rng(13);
    I8Matrix m = oracle::random_i8(rng, 6, 24);
    I8Matrix copy = m;
    OperandRegA r1 = extract_reg_a(m, 2, 1);
    OperandRegA r2 = extract_reg_a(m, 2, 1);
    CHECK(r1 == r2);
    CHECK(m == copy);

    I8Matrix scattered(6, 24);
    for (int i = 0; i < 2; ++i)
        for (int k = 0; k < 8; ++k) scattered(4 + i, 8 + k) = static_cast<std::int8_t>(r1.a(i, k));
    for (int i = 0; i < 2; ++i)
        for (int k = 0; k < 8; ++k) CHECK(scattered(4 + i, 8 + k) == m(4 + i, 8 + k));
}

TEST_CASE("pad_to_multiple") {
    std::mt19937_64 rng(17);
    I8Matrix m = oracle::random_i8(rng, 5, 13);
    I8Matrix p = pad_to_multiple(m, 2, 8);
    CHECK(p.rows == 6);
    CHECK(p.cols == 16);
    for (int r = 0; r < p.rows; ++r)
        for (int c = 0; c < p.cols; ++c)
            CHECK(p(r, c) == (r < 5 && c < 13 ? m(r, c) : 0));

    I4MatrixPacked m4 = oracle::random_i4(rng, 5, 13);
    I4MatrixPacked p4 = pad_to_multiple(m4, 8, 4);
    CHECK(p4.rows == 8);
    CHECK(p4.cols == 16);
    for (int r = 0; r < p4.rows; ++r)
        for (int c = 0; c < p4.cols; ++c)
            CHECK(p4.get(r, c) == (r < 5 && c < 13 ? m4.get(r, c) : 0));
}

TEST_CASE("tensor file roundtrip per dtype") {
    std::mt19937_64 rng(19);
    const std::string path = "core_roundtrip.aqt";

    I8Matrix m8 = oracle::random_i8(rng, 3, 5);
    save_tensor(Tensor::from(m8), path);
    CHECK(load_tensor(path).to_i8() == m8);

    I4MatrixPacked m4 = oracle::random_i4(rng, 3, 5); // odd element count
    save_tensor(Tensor::from(m4), path);
    CHECK(load_tensor(path).to_i4() == m4);

    I16Matrix m16(2, 3, {-32768, 32767, -1, 0, 1, 12345});
    save_tensor(Tensor::from(m16), path);
    CHECK(load_tensor(path).to_i16() == m16);

    I32Matrix m32(1, 3, {-2147483647 - 1, 2147483647, -42});
    save_tensor(Tensor::from(m32), path);
    CHECK(load_tensor(path).to_i32() == m32);

    std::remove(path.c_str());
}

TEST_CASE("tensor file rejects malformed input") {
    const std::string path = "core_badfile.aqt";
    std::mt19937_64 rng(23);
    save_tensor(Tensor::from(oracle::random_i8(rng, 4, 4)), path);

    {
        // truncate the payload
        FILE* f = std::fopen(path.c_str(), "rb");
        char buf[64];
        std::size_t n = std::fread(buf, 1, sizeof(buf), f);
        std::fclose(f);
        f = std::fopen(path.c_str(), "wb");
        std::fwrite(buf, 1, n - 3, f);
        std::fclose(f);
        CHECK_THROWS_AS(load_tensor(path), FormatError);
    }
    {
        FILE* f = std::fopen(path.c_str(), "wb");
        std::fwrite("NOPE\x00\x01", 1, 6, f);
        std::fclose(f);
        CHECK_THROWS_AS(load_tensor(path), FormatError);
    }
    CHECK_THROWS_AS(load_tensor("does_not_exist.aqt"), FormatError);
    std::remove(path.c_str());
}

TEST_CASE("tensor values decode any dtype") {
    std::vector<int> vals{-8, 7, 0};
    Tensor t = Tensor::from(pack_int4(vals, 1, 3));
    CHECK(t.values() == std::vector<std::int64_t>{-8, 7, 0});
    CHECK(t.element_count() == 3);
}

TEST_CASE("tensor file bytes are exactly as specified") {
    std::vector<int> vals{-8, 7, 0};
    const std::string path = "core_exact.aqt";
    save_tensor(Tensor::from(pack_int4(vals, 1, 3)), path);

    FILE* f = std::fopen(path.c_str(), "rb");
    unsigned char buf[32];
    std::size_t n = std::fread(buf, 1, sizeof(buf), f);
    std::fclose(f);
    std::remove(path.c_str());

    // magic, dtype=int4, ndim=2, dims {1,3} LE, payload {0x78, 0x00}
    const unsigned char expect[] = {'A', 'Q', 'T', '1', 0x01, 0x02,
                                    0x01, 0x00, 0x00, 0x00,
                                    0x03, 0x00, 0x00, 0x00,
                                    0x78, 0x00};
    REQUIRE(n == sizeof(expect));
    for (std::size_t i = 0; i < n; ++i) CHECK(buf[i] == expect[i]);
}
