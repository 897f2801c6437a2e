#pragma once

// Multiplicative characters mod p^k, evaluated exactly as rational angles.
// A character is indexed by its exponent m on a fixed generator g:
// chi(g^e) = e(m*e/phi). The parameter t_chi linearizes chi near 1 and is
// extracted by an exact integer formula, never by matching floating angles.

#include <complex>
#include <numbers>
#include <random>

#include "kpp/modular.hpp"

namespace kpp {

// The root of unity e(num/den) = exp(2*pi*i*num/den), stored reduced with
// 0 <= num < den. Products are exact fraction additions.
struct RationalAngle {
    u64 num = 0;
    u64 den = 1;

    static RationalAngle make(u64 num, u64 den) {
        num %= den;
        u64 g = std::gcd(num, den);
        return RationalAngle{num / g, den / g};
    }
    RationalAngle operator*(const RationalAngle& o) const {  // e(a)*e(b) = e(a+b)
        u64 l = std::lcm(den, o.den);
        u64 s = (u64)(((u128)num * (l / den) + (u128)o.num * (l / o.den)) % l);
        return make(s, l);
    }
    bool operator==(const RationalAngle&) const = default;
    std::complex<double> to_complex() const {
        double a = 2.0 * std::numbers::pi * (double)num / (double)den;
        return {std::cos(a), std::sin(a)};
    }
};

// t_chi as a residue mod p^(k-l) (p^l for even k, p^(l+1) for odd k).
struct TChi {
    u64 value = 0;
    u64 modulus = 1;
};

class Character {
public:
    Character(const DlogTable& table, u64 m) : table_(&table), m_(m % table.modulus().phi) {}

    u64 index() const { return m_; }
    const PrimePowerModulus& modulus() const { return table_->modulus(); }
    const DlogTable& dlog() const { return *table_; }
    bool is_trivial() const { return m_ == 0; }

    // exact angle m*log(x)/phi, reduced
    RationalAngle eval(u64 x) const {
        const auto& mod = modulus();
        return RationalAngle::make(mulmod(m_, table_->log(x), mod.phi), mod.phi);
    }

private:
    const DlogTable* table_;
    u64 m_;
};

// All phi(q) characters in index order; index 0 is the trivial character.
inline std::vector<Character> enumerate_characters(const DlogTable& table) {
    std::vector<Character> out;
    out.reserve(table.modulus().phi);
    for (u64 m = 0; m < table.modulus().phi; ++m) out.emplace_back(table, m);
    return out;
}

namespace detail {

// Per-table constants for t extraction: t_chi = m * t_unit mod p^(k-l).
// Even k uses the reference unit 1 + p^l (order p^l); odd k uses
// u = 1 + p^l + inv2(p^(l+1)) * p^(2l) (order p^(l+1)), the defining
// relation's argument at x = 1. In both cases log(u) is a multiple of
// phi / ord(u), so the division is exact.
struct TExtraction {
    u64 t_unit;  // unit multiplier mod tmod
    u64 tmod;
};

inline TExtraction t_extraction(const DlogTable& table) {
    const auto& mod = table.modulus();
    if (mod.k < 2) throw precondition_error("char_t: requires k >= 2");
    const u64 pl = mod.pl();
    const u64 tmod = mod.tmod();
    u64 u;
    if (mod.k % 2 == 0) {
        u = (1 + pl) % mod.q;
    } else {
        u64 p2l = pl * pl;
        u64 i2 = invmod(2, tmod);
        u = (u64)(((u128)1 + pl + (u128)i2 * p2l) % mod.q);
    }
    u64 step = mod.phi / tmod;  // index of the subgroup generated by u
    u64 lg = table.log(u);
    if (lg % step != 0) throw std::logic_error("char_t: reference log not divisible; dlog table corrupt");
    u64 v = (lg / step) % tmod;
    if (std::gcd(v, tmod) != 1) throw std::logic_error("char_t: reference unit has wrong order");
    return {v, tmod};
}

}  // namespace detail

// t_chi, defined by chi(1 + p^l x) = e_{p^l}(t x) for even k and
// chi(1 + p^l x + inv2 p^{2l} x^2) = e_{p^(l+1)}(t x) for odd k.
// The defining relation is self-checked at 8 pseudo-random x.
inline TChi char_t(const Character& chi, bool self_check = true) {
    const auto& mod = chi.modulus();
    auto ex = detail::t_extraction(chi.dlog());
    TChi t{mulmod(chi.index() % ex.tmod, ex.t_unit, ex.tmod), ex.tmod};

    if (self_check) {
        const u64 pl = mod.pl();
        std::mt19937_64 rng(0x7c3a9d);
        for (int i = 0; i < 8; ++i) {
            u64 x = rng() % ex.tmod;
            u64 point;
            if (mod.k % 2 == 0) {
                point = (u64)(((u128)1 + (u128)pl * x) % mod.q);
            } else {
                u64 i2 = invmod(2, ex.tmod);
                u64 x2 = mulmod(x, x, ex.tmod);
                point = (u64)(((u128)1 + (u128)pl * x + (u128)mulmod(i2, x2, ex.tmod) * pl % mod.q * pl) % mod.q);
            }
            if (chi.eval(point) != RationalAngle::make(mulmod(t.value, x, ex.tmod), ex.tmod))
                throw std::logic_error("char_t: defining relation failed self-check");
        }
    }
    return t;
}

// C_p(k, j): the characters trivial on 1 + p^j Z, i.e. m = 0 mod p^(k-j).
// Order p^(j-1)(p-1) for j >= 1, order 1 for j = 0.
inline std::vector<Character> subgroup_C(const DlogTable& table, u32 j) {
    const auto& mod = table.modulus();
    if (j > mod.k) throw precondition_error("subgroup_C: j out of range");
    if (j == 0) return {Character(table, 0)};
    u64 step = detail::pow_u64(mod.p, mod.k - j);
    std::vector<Character> out;
    for (u64 m = 0; m < mod.phi; m += step) out.emplace_back(table, m);
    return out;
}

// t mod p avoids +-2 a_j mod p for every j (membership in S_q).
inline bool in_S_residue(u64 t_mod_p, const std::vector<i64>& a_list, u64 p) {
    for (i64 a : a_list) {
        u64 ar = reduce_signed(a, p);
        if (ar == 0) throw precondition_error("in_S: a_j must be a unit mod p");
        u64 twice = 2 * ar % p;  // nonzero: p is odd and ar a unit
        if (t_mod_p == twice || t_mod_p == p - twice) return false;
    }
    return true;
}

inline bool in_S(const Character& chi, const std::vector<i64>& a_list) {
    const u64 p = chi.modulus().p;
    return in_S_residue(char_t(chi, false).value % p, a_list, p);
}

}  // namespace kpp
