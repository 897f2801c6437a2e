#pragma once

// Exact modular arithmetic over odd prime powers: primitive roots, dense
// discrete-log tables (with optional disk cache), Tonelli-Shanks square
// roots, and Hensel lifting of quadratic congruences.

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <memory>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace kpp {

using u32 = std::uint32_t;
using u64 = std::uint64_t;
using i64 = std::int64_t;
using u128 = unsigned __int128;
using i128 = __int128;

// Violations of documented operation preconditions. The CLI maps this to
// exit code 2; everything else non-usage is an internal error.
struct precondition_error : std::runtime_error {
    explicit precondition_error(const std::string& msg) : std::runtime_error(msg) {}
};

inline u64 mulmod(u64 a, u64 b, u64 m) { return (u128)a * b % m; }

inline u64 powmod(u64 base, u64 exp, u64 m) {
    if (m == 1) return 0;
    u64 r = 1;
    base %= m;
    while (exp) {
        if (exp & 1) r = mulmod(r, base, m);
        base = mulmod(base, base, m);
        exp >>= 1;
    }
    return r;
}

// Inverse of a mod m, gcd(a, m) = 1 required.
inline u64 invmod(u64 a, u64 m) {
    i64 t = 0, nt = 1;
    i64 r = (i64)m, nr = (i64)(a % m);
    while (nr != 0) {
        i64 q = r / nr;
        t = std::exchange(nt, t - q * nt);
        r = std::exchange(nr, r - q * nr);
    }
    if (r != 1) throw precondition_error("invmod: argument not a unit");
    return (u64)(t < 0 ? t + (i64)m : t);
}

// Canonical representative of a signed integer in [0, m).
inline u64 reduce_signed(i64 a, u64 m) {
    i64 r = a % (i64)m;
    return (u64)(r < 0 ? r + (i64)m : r);
}

// Deterministic Miller-Rabin, valid for all 64-bit inputs.
inline bool is_prime(u64 n) {
    if (n < 2) return false;
    for (u64 p : {2ull, 3ull, 5ull, 7ull, 11ull, 13ull, 17ull, 19ull, 23ull, 29ull, 31ull, 37ull}) {
        if (n % p == 0) return n == p;
    }
    u64 d = n - 1;
    int s = 0;
    while ((d & 1) == 0) { d >>= 1; ++s; }
    for (u64 a : {2ull, 3ull, 5ull, 7ull, 11ull, 13ull, 17ull, 19ull, 23ull, 29ull, 31ull, 37ull}) {
        u64 x = powmod(a, d, n);
        if (x == 1 || x == n - 1) continue;
        bool composite = true;
        for (int i = 0; i < s - 1 && composite; ++i) {
            x = mulmod(x, x, n);
            if (x == n - 1) composite = false;
        }
        if (composite) return false;
    }
    return true;
}

// Legendre symbol (n|p) in {-1, 0, 1}; p an odd prime.
inline int legendre(i64 n, u64 p) {
    u64 r = powmod(reduce_signed(n, p), (p - 1) / 2, p);
    if (r == 0) return 0;
    return r == 1 ? 1 : -1;
}

// q = p^k for an odd prime p. Capped so that phi(q)*q fits unsigned 64-bit
// arithmetic; all products in the library then stay exact via 128-bit
// intermediates.
struct PrimePowerModulus {
    u64 p = 0;
    u32 k = 0;
    u64 q = 0;
    u32 l = 0;    // floor(k/2)
    u64 phi = 0;  // p^(k-1) * (p-1)

    PrimePowerModulus() = default;

    PrimePowerModulus(u64 p_, u32 k_) : p(p_), k(k_) {
        if (p < 3 || !is_prime(p)) throw precondition_error("modulus: p must be an odd prime >= 3");
        if (k < 1) throw precondition_error("modulus: exponent must be >= 1");
        u128 acc = 1;
        for (u32 i = 0; i < k; ++i) {
            acc *= p;
            if (acc > (u128)3'000'000'000ull) throw precondition_error("modulus: p^k exceeds the supported range");
        }
        q = (u64)acc;
        phi = q / p * (p - 1);
        l = k / 2;
    }

    u64 pl() const {  // p^l
        u64 r = 1;
        for (u32 i = 0; i < l; ++i) r *= p;
        return r;
    }
    // modulus of t for characters mod q: p^l for even k, p^(l+1) for odd k
    u64 tmod() const { return k % 2 == 0 ? pl() : pl() * p; }
    bool is_unit(u64 x) const { return x % p != 0; }
};

// Smallest primitive root mod p^k (the unit group is cyclic for odd p).
inline u64 primitive_root(const PrimePowerModulus& m) {
    // prime factors of phi = p^(k-1)(p-1)
    std::vector<u64> fac;
    if (m.k >= 2) fac.push_back(m.p);
    u64 n = m.p - 1;
    for (u64 d = 2; d * d <= n; ++d) {
        if (n % d == 0) {
            fac.push_back(d);
            while (n % d == 0) n /= d;
        }
    }
    if (n > 1) fac.push_back(n);
    for (u64 g = 2; g < m.q; ++g) {
        if (!m.is_unit(g)) continue;
        bool ok = true;
        for (u64 f : fac) {
            if (powmod(g, m.phi / f, m.q) == 1) { ok = false; break; }
        }
        if (ok) return g;
    }
    throw std::logic_error("primitive_root: no generator found");
}

// Dense discrete-log table: log[x] = e with generator^e = x mod q, for every
// unit x. Immutable after construction; safe to share across threads.
class DlogTable {
public:
    static constexpr u32 kNoLog = 0xFFFFFFFFu;

    DlogTable(const PrimePowerModulus& m, u64 generator) : mod_(m), g_(generator) {
        build();
    }
    explicit DlogTable(const PrimePowerModulus& m) : DlogTable(m, primitive_root(m)) {}

    const PrimePowerModulus& modulus() const { return mod_; }
    u64 generator() const { return g_; }

    u64 log(u64 x) const {
        x %= mod_.q;
        if (!mod_.is_unit(x)) throw precondition_error("dlog: argument not a unit");
        return log_[x];
    }

    // Cache format: 16-byte header (magic "KLDL", version u32, p u32, k u32),
    // then phi(q) little-endian u64 entries, entry i = log of the i-th unit
    // in ascending order.
    bool save(const std::string& path) const {
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        if (!out) return false;
        const char magic[4] = {'K', 'L', 'D', 'L'};
        u32 version = 1, p32 = (u32)mod_.p, k32 = mod_.k;
        out.write(magic, 4);
        out.write(reinterpret_cast<const char*>(&version), 4);
        out.write(reinterpret_cast<const char*>(&p32), 4);
        out.write(reinterpret_cast<const char*>(&k32), 4);
        std::vector<u64> entries;
        entries.reserve(mod_.phi);
        for (u64 x = 0; x < mod_.q; ++x)
            if (mod_.is_unit(x)) entries.push_back(log_[x]);
        out.write(reinterpret_cast<const char*>(entries.data()), (std::streamsize)(entries.size() * 8));
        return bool(out);
    }

    static std::unique_ptr<DlogTable> load(const std::string& path, const PrimePowerModulus& m, u64 generator) {
        std::ifstream in(path, std::ios::binary);
        if (!in) return nullptr;
        char magic[4];
        u32 version = 0, p32 = 0, k32 = 0;
        in.read(magic, 4);
        in.read(reinterpret_cast<char*>(&version), 4);
        in.read(reinterpret_cast<char*>(&p32), 4);
        in.read(reinterpret_cast<char*>(&k32), 4);
        if (!in || std::memcmp(magic, "KLDL", 4) != 0 || version != 1 || p32 != m.p || k32 != m.k)
            return nullptr;
        std::vector<u64> entries(m.phi);
        in.read(reinterpret_cast<char*>(entries.data()), (std::streamsize)(m.phi * 8));
        if (!in) return nullptr;
        try {
            return std::unique_ptr<DlogTable>(new DlogTable(m, generator, entries));
        } catch (const std::runtime_error&) {
            return nullptr;  // corrupted cache is a miss, not an error
        }
    }

private:
    DlogTable(const PrimePowerModulus& m, u64 generator, const std::vector<u64>& unit_entries)
        : mod_(m), g_(generator) {
        log_.assign(mod_.q, kNoLog);
        u64 i = 0;
        for (u64 x = 0; x < mod_.q; ++x) {
            if (!mod_.is_unit(x)) continue;
            if (unit_entries[i] >= mod_.phi) throw std::runtime_error("dlog cache: entry out of range");
            log_[x] = (u32)unit_entries[i++];
        }
        // spot-check the cache instead of trusting it blindly
        for (u64 x : {(u64)1, g_ % mod_.q, mod_.q - 1}) {
            if (powmod(g_, log_[x], mod_.q) != x) throw std::runtime_error("dlog cache: failed round-trip check");
        }
    }

    void build() {
        log_.assign(mod_.q, kNoLog);
        u64 x = 1, filled = 0;
        for (u64 e = 0; e < mod_.phi; ++e) {
            if (log_[x] != kNoLog) break;  // cycle shorter than phi
            log_[x] = (u32)e;
            ++filled;
            x = mulmod(x, g_, mod_.q);
        }
        if (filled != mod_.phi) throw precondition_error("build_dlog: generator is not primitive");
    }

    PrimePowerModulus mod_;
    u64 g_;
    std::vector<u32> log_;  // indexed by residue; kNoLog at non-units
};

// Loads the table from $KPP_CACHE_DIR/dlog_<p>_<k>.bin when the variable is
// set (building and saving on a miss); otherwise builds in memory.
inline std::unique_ptr<DlogTable> dlog_for(const PrimePowerModulus& m) {
    const char* dir = std::getenv("KPP_CACHE_DIR");
    u64 g = primitive_root(m);
    if (dir && *dir) {
        std::string path = std::string(dir) + "/dlog_" + std::to_string(m.p) + "_" + std::to_string(m.k) + ".bin";
        if (auto t = DlogTable::load(path, m, g)) return t;
        auto t = std::make_unique<DlogTable>(m, g);
        std::error_code ec;
        std::filesystem::create_directories(dir, ec);
        t->save(path);  // best effort; a failed write only disables reuse
        return t;
    }
    return std::make_unique<DlogTable>(m);
}

// All x with x^2 = n mod p, ascending; empty iff n is a non-residue.
inline std::vector<u64> sqrt_mod_prime(u64 n, u64 p) {
    n %= p;
    if (n == 0) return {0};
    if (legendre((i64)n, p) != 1) return {};
    u64 r;
    if (p % 4 == 3) {
        r = powmod(n, (p + 1) / 4, p);
    } else {
        // Tonelli-Shanks
        u64 s = p - 1;
        int e = 0;
        while ((s & 1) == 0) { s >>= 1; ++e; }
        u64 z = 2;
        while (legendre((i64)z, p) != -1) ++z;
        u64 c = powmod(z, s, p);
        u64 x = powmod(n, (s + 1) / 2, p);
        u64 t = powmod(n, s, p);
        int m = e;
        while (t != 1) {
            u64 tt = t;
            int i = 0;
            while (tt != 1) { tt = mulmod(tt, tt, p); ++i; }
            u64 b = powmod(c, 1ull << (m - i - 1), p);
            x = mulmod(x, b, p);
            c = mulmod(b, b, p);
            t = mulmod(t, c, p);
            m = i;
        }
        r = x;
    }
    u64 r2 = p - r;
    return {std::min(r, r2), std::max(r, r2)};
}

// h(x) = a x^2 + t x - b with a, b units mod p^l.
struct QuadraticCongruence {
    u64 a, t, b;  // canonical residues mod p^l
};

namespace detail {
inline u64 pow_u64(u64 b, u32 e) {
    u64 r = 1;
    while (e--) r *= b;
    return r;
}
inline u64 eval_h(const QuadraticCongruence& c, u64 x, u64 m) {
    u128 v = (u128)c.a * x % m * x % m + (u128)c.t * x % m + (m - c.b % m);
    return (u64)(v % m);
}
}  // namespace detail

// Exactly {x unit mod p^l : h(x) = 0 mod p^l}, ascending. Separable
// discriminant (t^2 + 4ab != 0 mod p): solve mod p, Hensel-lift with Newton
// steps. Degenerate discriminant: exhaustive O(p^l) scan.
inline std::vector<u64> lift_quadratic_roots(const QuadraticCongruence& c, u64 p, u32 l) {
    if (l < 1) throw precondition_error("lift_quadratic_roots: exponent must be >= 1");
    const u64 pl = detail::pow_u64(p, l);
    if (c.a % p == 0 || c.b % p == 0) throw precondition_error("lift_quadratic_roots: a and b must be units");
    const u64 disc = (u64)(((u128)c.t * c.t + (u128)4 * c.a % pl * (c.b % pl)) % p);

    if (disc == 0) {
        std::vector<u64> roots;
        for (u64 x = 1; x < pl; ++x) {
            if (x % p == 0) continue;
            if (detail::eval_h(c, x, pl) == 0) roots.push_back(x);
        }
        return roots;
    }

    auto mod_roots = sqrt_mod_prime(disc, p);
    if (mod_roots.empty()) return {};
    const u64 inv2a = invmod(2 * c.a % p, p);
    std::vector<u64> roots;
    for (u64 s : mod_roots) {
        // x = (-t + s) / 2a mod p, then lift; h'(x) = 2ax + t stays a unit
        u64 x = mulmod(reduce_signed((i64)s - (i64)(c.t % p), p), inv2a, p);
        u64 cur = p;
        while (cur < pl) {
            // next divides cur^2, so one Newton step lifts mod cur -> mod next
            u64 next = (cur <= pl / cur) ? cur * cur : pl;
            u64 h = detail::eval_h(c, x, next);
            u64 hp = (u64)(((u128)2 * c.a % next * x + c.t) % next);
            x = (u64)(((u128)x + next - (u128)h * invmod(hp, next) % next) % next);
            cur = next;
        }
        roots.push_back(x % pl);
    }
    std::sort(roots.begin(), roots.end());
    return roots;
}

inline std::vector<u64> lift_quadratic_roots(u64 a, u64 t, u64 b, u64 p, u32 l) {
    return lift_quadratic_roots(QuadraticCongruence{a, t, b}, p, l);
}

}  // namespace kpp
