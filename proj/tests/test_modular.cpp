#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>

#include "kpp/modular.hpp"

using namespace kpp;

TEST(Modular, BasicOps) {
    EXPECT_EQ(mulmod(1'000'000'007ull, 998'244'353ull, 2'000'000'011ull),
              (u64)((u128)1'000'000'007ull * 998'244'353ull % 2'000'000'011ull));
    EXPECT_EQ(powmod(2, 10, 1000), 24u);
    EXPECT_EQ(invmod(3, 7), 5u);
    EXPECT_THROW(invmod(3, 9), precondition_error);
    EXPECT_EQ(reduce_signed(-1, 7), 6u);
    EXPECT_EQ(reduce_signed(-14, 7), 0u);
    EXPECT_EQ(reduce_signed(15, 7), 1u);
}

TEST(Modular, IsPrime) {
    EXPECT_TRUE(is_prime(2));
    EXPECT_TRUE(is_prime(3));
    EXPECT_TRUE(is_prime(997));
    EXPECT_TRUE(is_prime(2'147'483'647ull));  // 2^31 - 1
    EXPECT_FALSE(is_prime(1));
    EXPECT_FALSE(is_prime(997 * 991));
    EXPECT_FALSE(is_prime(3'215'031'751ull));  // strong pseudoprime to bases 2,3,5,7
}

TEST(Modular, Legendre) {
    // Euler's criterion cross-check on a full small prime
    for (u64 p : {7ull, 11ull, 13ull}) {
        int squares = 0;
        for (u64 n = 0; n < p; ++n) {
            int s = legendre((i64)n, p);
            bool is_sq = false;
            for (u64 x = 0; x < p; ++x)
                if (x * x % p == n) is_sq = true;
            if (n == 0) EXPECT_EQ(s, 0);
            else EXPECT_EQ(s, is_sq ? 1 : -1);
            if (s == 1) ++squares;
        }
        EXPECT_EQ(squares, (int)(p - 1) / 2);
    }
    EXPECT_EQ(legendre(-1, 7), -1);  // 7 = 3 mod 4
    EXPECT_EQ(legendre(-1, 13), 1);  // 13 = 1 mod 4
}

TEST(Modular, PrimePowerModulus) {
    PrimePowerModulus m9(3, 2);
    EXPECT_EQ(m9.q, 9u);
    EXPECT_EQ(m9.phi, 6u);
    EXPECT_EQ(m9.l, 1u);
    EXPECT_EQ(m9.pl(), 3u);
    EXPECT_EQ(m9.tmod(), 3u);  // even k: p^l

    PrimePowerModulus m27(3, 3);
    EXPECT_EQ(m27.q, 27u);
    EXPECT_EQ(m27.phi, 18u);
    EXPECT_EQ(m27.l, 1u);
    EXPECT_EQ(m27.tmod(), 9u);  // odd k: p^(l+1)

    PrimePowerModulus m25(5, 2);
    EXPECT_EQ(m25.phi, 20u);

    EXPECT_THROW(PrimePowerModulus(2, 3), precondition_error);
    EXPECT_THROW(PrimePowerModulus(9, 1), precondition_error);
    EXPECT_THROW(PrimePowerModulus(3, 0), precondition_error);
    EXPECT_THROW(PrimePowerModulus(3, 25), precondition_error);  // above the q cap
}

TEST(Modular, PrimitiveRoot) {
    EXPECT_EQ(primitive_root(PrimePowerModulus(3, 2)), 2u);
    EXPECT_EQ(primitive_root(PrimePowerModulus(5, 1)), 2u);
    EXPECT_EQ(primitive_root(PrimePowerModulus(7, 2)), 3u);
    // order check on a few moduli: g^e hits every unit exactly once
    for (auto [p, k] : {std::pair<u64, u32>{3, 4}, {5, 3}, {11, 2}, {101, 1}}) {
        PrimePowerModulus m(p, k);
        u64 g = primitive_root(m);
        std::vector<char> seen(m.q, 0);
        u64 x = 1;
        for (u64 e = 0; e < m.phi; ++e) {
            EXPECT_FALSE(seen[x]) << "repeat at exponent " << e;
            seen[x] = 1;
            x = mulmod(x, g, m.q);
        }
        EXPECT_EQ(x, 1u);
    }
}

TEST(Modular, DlogTable) {
    PrimePowerModulus m(3, 2);
    DlogTable t(m);
    EXPECT_EQ(t.generator(), 2u);
    EXPECT_EQ(t.log(1), 0u);
    EXPECT_EQ(t.log(2), 1u);
    EXPECT_EQ(t.log(4), 2u);
    EXPECT_EQ(t.log(8), 3u);
    EXPECT_THROW(t.log(3), precondition_error);
    EXPECT_THROW(t.log(0), precondition_error);

    // log is a complete bijection units -> [0, phi)
    PrimePowerModulus m343(7, 3);
    DlogTable t343(m343);
    std::vector<char> seen(m343.phi, 0);
    for (u64 x = 1; x < m343.q; ++x) {
        if (!m343.is_unit(x)) continue;
        u64 e = t343.log(x);
        ASSERT_LT(e, m343.phi);
        EXPECT_FALSE(seen[e]);
        seen[e] = 1;
        EXPECT_EQ(powmod(t343.generator(), e, m343.q), x);
    }
}

TEST(Modular, DlogCacheRoundTrip) {
    PrimePowerModulus m(7, 2);
    DlogTable built(m);
    auto dir = std::filesystem::temp_directory_path() / "kpp_dlog_test";
    std::filesystem::create_directories(dir);
    auto path = (dir / "dlog_7_2.bin").string();
    ASSERT_TRUE(built.save(path));

    // pinned format: 16-byte header then phi little-endian u64 entries
    std::ifstream in(path, std::ios::binary);
    char magic[4];
    u32 version, p32, k32;
    in.read(magic, 4);
    in.read(reinterpret_cast<char*>(&version), 4);
    in.read(reinterpret_cast<char*>(&p32), 4);
    in.read(reinterpret_cast<char*>(&k32), 4);
    EXPECT_EQ(std::string(magic, 4), "KLDL");
    EXPECT_EQ(version, 1u);
    EXPECT_EQ(p32, 7u);
    EXPECT_EQ(k32, 2u);
    u64 first;
    in.read(reinterpret_cast<char*>(&first), 8);
    EXPECT_EQ(first, built.log(1));  // first unit ascending is 1
    in.seekg(0, std::ios::end);
    EXPECT_EQ((u64)in.tellg(), 16 + m.phi * 8);

    auto loaded = DlogTable::load(path, m, built.generator());
    ASSERT_NE(loaded, nullptr);
    for (u64 x = 1; x < m.q; ++x) {
        if (m.is_unit(x)) {
            EXPECT_EQ(loaded->log(x), built.log(x));
        }
    }

    // corrupt one entry: load must reject rather than serve wrong logs
    {
        std::fstream f(path, std::ios::binary | std::ios::in | std::ios::out);
        f.seekp(16);
        u64 bogus = 1;  // log(1) = 1 fails the round-trip spot check
        f.write(reinterpret_cast<const char*>(&bogus), 8);
    }
    EXPECT_EQ(DlogTable::load(path, m, built.generator()), nullptr);
    std::filesystem::remove_all(dir);
}

TEST(Modular, DlogForHonorsCacheDir) {
    auto dir = std::filesystem::temp_directory_path() / "kpp_cache_env_test";
    std::filesystem::remove_all(dir);
    setenv("KPP_CACHE_DIR", dir.c_str(), 1);
    PrimePowerModulus m(5, 2);
    auto t1 = dlog_for(m);
    EXPECT_TRUE(std::filesystem::exists(dir / "dlog_5_2.bin"));
    auto t2 = dlog_for(m);  // second call loads the file
    for (u64 x = 1; x < m.q; ++x) {
        if (m.is_unit(x)) {
            EXPECT_EQ(t1->log(x), t2->log(x));
        }
    }
    unsetenv("KPP_CACHE_DIR");
    std::filesystem::remove_all(dir);
}

TEST(Modular, SqrtModPrime) {
    EXPECT_EQ(sqrt_mod_prime(4, 7), (std::vector<u64>{2, 5}));
    EXPECT_EQ(sqrt_mod_prime(3, 7), (std::vector<u64>{}));
    EXPECT_EQ(sqrt_mod_prime(0, 7), (std::vector<u64>{0}));
    // exhaustive cross-check, both p mod 4 classes and p mod 8 = 1
    for (u64 p : {7ull, 11ull, 13ull, 17ull, 41ull, 97ull}) {
        for (u64 n = 0; n < p; ++n) {
            auto rs = sqrt_mod_prime(n, p);
            std::vector<u64> expect;
            for (u64 x = 0; x < p; ++x)
                if (x * x % p == n) expect.push_back(x);
            EXPECT_EQ(rs, expect) << "n=" << n << " p=" << p;
        }
    }
}

TEST(Modular, LiftQuadraticRoots) {
    // x^2 + 1: no roots mod 3, roots {2,3} mod 5
    EXPECT_TRUE(lift_quadratic_roots(1, 0, reduce_signed(-1, 3), 3, 1).empty());
    EXPECT_EQ(lift_quadratic_roots(1, 0, reduce_signed(-1, 5), 5, 1), (std::vector<u64>{2, 3}));
    // x^2 - 1 mod 25: {1, 24}
    EXPECT_EQ(lift_quadratic_roots(1, 0, 1, 5, 2), (std::vector<u64>{1, 24}));
    EXPECT_THROW(lift_quadratic_roots(5, 0, 1, 5, 2), precondition_error);
    EXPECT_THROW(lift_quadratic_roots(1, 0, 5, 5, 2), precondition_error);

    // randomized cross-check against exhaustive root scan, including
    // degenerate discriminants
    std::mt19937_64 rng(42);
    for (int iter = 0; iter < 400; ++iter) {
        u64 p = std::vector<u64>{3, 5, 7, 11, 13}[rng() % 5];
        u32 l = 1 + (u32)(rng() % 3);
        u64 pl = 1;
        for (u32 i = 0; i < l; ++i) pl *= p;
        u64 a = 1 + rng() % (pl - 1), b = 1 + rng() % (pl - 1), t = rng() % pl;
        if (a % p == 0 || b % p == 0) continue;
        auto got = lift_quadratic_roots(a, t, b, p, l);
        std::vector<u64> expect;
        for (u64 x = 1; x < pl; ++x) {
            if (x % p == 0) continue;
            if ((u64)(((u128)a * x % pl * x + (u128)t * x + (pl - b)) % pl) == 0) expect.push_back(x);
        }
        EXPECT_EQ(got, expect) << "p=" << p << " l=" << l << " a=" << a << " t=" << t << " b=" << b;
    }
}
