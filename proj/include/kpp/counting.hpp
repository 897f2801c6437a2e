#pragma once

// Solution counting for the families y: a_1(x_1 + x_1^{-1}) = ... =
// a_r(x_r + x_r^{-1}) mod p^l. Y' excludes x_j = +-1 mod p; Y_0 adds the
// monomial condition prod x_j^{n_j} = 1. The obstruction polynomial F(t) is
// built by exact symmetric reduction: x^m + x^{-m} is a fixed integer
// polynomial in s = x + x^{-1}, and s_j = t / a_j introduces only a_j-power
// denominators.

#include <complex>
#include <map>

#include "kpp/modular.hpp"

namespace kpp {

struct CountingSpec {
    u64 p = 0;
    u32 l = 1;
    std::vector<i64> a_list;
    std::vector<i64> n_list;  // used by the Y_0 variants only

    void validate() const {
        if (p < 3 || !is_prime(p)) throw precondition_error("counting: p must be an odd prime");
        if (l < 1) throw precondition_error("counting: l must be >= 1");
        if (a_list.empty()) throw precondition_error("counting: a_list must be nonempty");
        for (i64 a : a_list)
            if (reduce_signed(a, p) == 0) throw precondition_error("counting: a_j must be a unit mod p");
        for (size_t i = 0; i < a_list.size(); ++i)
            for (size_t j = i + 1; j < a_list.size(); ++j)
                if (reduce_signed(a_list[i], p) == reduce_signed(a_list[j], p))
                    throw precondition_error("counting: a_j must be pairwise distinct mod p");
    }
};

struct SolutionTuple {
    std::vector<u64> x;  // units mod p^l
    u64 t = 0;           // a_1 (x_1 + x_1^{-1}) mod p^l
};

namespace detail {

// roots of a x^2 - t x + a = 0 mod p^l (the fiber of x + x^{-1} = t/a)
inline std::vector<u64> fiber_roots(u64 a_mod, u64 t, u64 p, u32 l, u64 pl) {
    return lift_quadratic_roots(a_mod, (pl - t % pl) % pl, (pl - a_mod) % pl, p, l);
}

inline void cartesian(const std::vector<std::vector<u64>>& per_j, u64 t, std::vector<SolutionTuple>& out) {
    std::vector<size_t> idx(per_j.size(), 0);
    while (true) {
        SolutionTuple s;
        s.t = t;
        s.x.reserve(per_j.size());
        for (size_t j = 0; j < per_j.size(); ++j) s.x.push_back(per_j[j][idx[j]]);
        out.push_back(std::move(s));
        size_t j = per_j.size();
        while (j-- > 0) {
            if (++idx[j] < per_j[j].size()) break;
            idx[j] = 0;
            if (j == 0) return;
        }
    }
}

}  // namespace detail

// Y'(p^l), enumerated per t. A fiber contributes only when t^2 - 4 a_j^2 is
// a nonzero square mod p: a non-square gives no roots, and a zero
// discriminant only gives roots congruent to +-1, which Y' excludes.
inline std::vector<SolutionTuple> enum_Yprime(const CountingSpec& spec) {
    spec.validate();
    const u64 p = spec.p, pl = detail::pow_u64(p, spec.l);
    std::vector<SolutionTuple> out;
    std::vector<std::vector<u64>> per_j(spec.a_list.size());
    for (u64 t = 0; t < pl; ++t) {
        bool ok = true;
        for (size_t j = 0; ok && j < spec.a_list.size(); ++j) {
            u64 am = reduce_signed(spec.a_list[j], p);
            if (legendre((i64)(mulmod(t % p, t % p, p) + 4 * p - 4 * mulmod(am, am, p) % p), p) != 1) ok = false;
        }
        if (!ok) continue;
        for (size_t j = 0; j < spec.a_list.size(); ++j)
            per_j[j] = detail::fiber_roots(reduce_signed(spec.a_list[j], pl), t, p, spec.l, pl);
        detail::cartesian(per_j, t, out);
    }
    return out;
}

// The character-sum count of the same set:
// 2^r p^(l-1) #{t mod p : (t^2 - 4 a_j^2 | p) = +1 for every j}.
inline u64 count_Yprime_char(const CountingSpec& spec) {
    spec.validate();
    const u64 p = spec.p;
    u64 good = 0;
    for (u64 t = 0; t < p; ++t) {
        bool ok = true;
        for (i64 a : spec.a_list) {
            u64 am = reduce_signed(a, p);
            if (legendre((i64)(mulmod(t, t, p) + 4 * p - 4 * mulmod(am, am, p) % p), p) != 1) { ok = false; break; }
        }
        if (ok) ++good;
    }
    return (1ull << spec.a_list.size()) * detail::pow_u64(p, spec.l - 1) * good;
}

// Y_0 (exclude_pm1 = false) or Y'_0 (true): the monomial condition
// prod x_j^{n_j} = 1 mod p^l on top of the fiber structure. Unlike Y', the
// full Y here includes degenerate fibers (they go through the exhaustive
// root scan).
inline std::vector<SolutionTuple> enum_Y0(const CountingSpec& spec, bool exclude_pm1) {
    spec.validate();
    if (spec.n_list.size() != spec.a_list.size()) throw precondition_error("enum_Y0: n_list must match a_list");
    for (i64 n : spec.n_list)
        if (n == 0) throw precondition_error("enum_Y0: n_j must be nonzero");
    const u64 p = spec.p, pl = detail::pow_u64(p, spec.l);
    std::vector<SolutionTuple> all;
    std::vector<std::vector<u64>> per_j(spec.a_list.size());
    for (u64 t = 0; t < pl; ++t) {
        bool ok = true;
        for (size_t j = 0; ok && j < spec.a_list.size(); ++j) {
            per_j[j] = detail::fiber_roots(reduce_signed(spec.a_list[j], pl), t, p, spec.l, pl);
            if (exclude_pm1)
                std::erase_if(per_j[j], [&](u64 x) { return x % p == 1 || x % p == p - 1; });
            if (per_j[j].empty()) ok = false;
        }
        if (ok) detail::cartesian(per_j, t, all);
    }
    std::vector<SolutionTuple> out;
    for (auto& s : all) {
        u64 prod = 1;
        for (size_t j = 0; j < s.x.size(); ++j) {
            i64 n = spec.n_list[j];
            u64 base = n > 0 ? s.x[j] : invmod(s.x[j], pl);
            prod = mulmod(prod, powmod(base, (u64)(n > 0 ? n : -n), pl), pl);
        }
        if (prod == 1) out.push_back(std::move(s));
    }
    return out;
}

// ---- exact rationals --------------------------------------------------

struct Fraction {
    i64 num = 0;
    i64 den = 1;

    static Fraction make(i128 n, i128 d) {
        if (d == 0) throw std::logic_error("fraction: zero denominator");
        if (d < 0) { n = -n; d = -d; }
        i128 a = n < 0 ? -n : n, b = d;
        while (b) { i128 t = a % b; a = b; b = t; }
        if (a > 1) { n /= a; d /= a; }
        if (n > INT64_MAX || n < INT64_MIN || d > INT64_MAX) throw std::overflow_error("fraction: overflow");
        return Fraction{(i64)n, (i64)d};
    }
    Fraction operator+(const Fraction& o) const { return make((i128)num * o.den + (i128)o.num * den, (i128)den * o.den); }
    Fraction operator*(const Fraction& o) const { return make((i128)num * o.num, (i128)den * o.den); }
    bool operator==(const Fraction&) const = default;
    bool is_zero() const { return num == 0; }
    double to_double() const { return (double)num / (double)den; }
};

using RationalPoly = std::vector<Fraction>;  // ascending powers of t

namespace detail {

inline RationalPoly poly_add(const RationalPoly& a, const RationalPoly& b) {
    RationalPoly r(std::max(a.size(), b.size()));
    for (size_t i = 0; i < r.size(); ++i) {
        Fraction s{0, 1};
        if (i < a.size()) s = s + a[i];
        if (i < b.size()) s = s + b[i];
        r[i] = s;
    }
    return r;
}

inline RationalPoly poly_mul(const RationalPoly& a, const RationalPoly& b) {
    if (a.empty() || b.empty()) return {};
    RationalPoly r(a.size() + b.size() - 1, Fraction{0, 1});
    for (size_t i = 0; i < a.size(); ++i)
        for (size_t j = 0; j < b.size(); ++j) r[i + j] = r[i + j] + a[i] * b[j];
    return r;
}

// integer polynomials with x^m + x^{-m} = cheb[m](x + x^{-1});
// cheb[0] = 2, cheb[1] = s, cheb[m] = s cheb[m-1] - cheb[m-2]
inline std::vector<std::vector<i64>> cheb_polys(unsigned max_m) {
    std::vector<std::vector<i64>> c(max_m + 1);
    c[0] = {2};
    if (max_m >= 1) c[1] = {0, 1};
    for (unsigned m = 2; m <= max_m; ++m) {
        c[m].assign(m + 1, 0);
        for (size_t i = 0; i < c[m - 1].size(); ++i) c[m][i + 1] += c[m - 1][i];
        for (size_t i = 0; i < c[m - 2].size(); ++i) c[m][i] -= c[m - 2][i];
    }
    return c;
}

}  // namespace detail

// F(t) with F(a_1(x+x^{-1})) = G(x_1..x_r) on the fibers, where
// G = prod over sign patterns sigma of (prod_j x_j^{sigma_j n_j} - 1).
// The fold coefficients express G in the basis prod_j (x_j^{e_j}+x_j^{-e_j}).
struct ObstructionPolynomial {
    RationalPoly coeffs;
    unsigned degree = 0;
    std::vector<i64> cleared;  // denominator * F, integer coefficients
    i64 denominator = 1;
    std::vector<std::pair<std::vector<int>, i64>> fold;  // exponent tuple -> coefficient

    // F-tilde(s_1..s_r), the symmetric form before s_j = t/a_j
    std::complex<double> eval_symmetric(const std::vector<std::complex<double>>& s) const {
        auto cheb = detail::cheb_polys(max_fold_exp());
        std::complex<double> total = 0.0;
        for (const auto& [e, c] : fold) {
            std::complex<double> term = (double)c;
            for (size_t j = 0; j < e.size(); ++j) {
                if (e[j] == 0) continue;
                const auto& pc = cheb[(unsigned)e[j]];
                std::complex<double> h = 0.0;
                for (size_t v = pc.size(); v-- > 0;) h = h * s[j] + (double)pc[v];
                term *= h;
            }
            total += term;
        }
        return total;
    }

    unsigned max_fold_exp() const {
        int mx = 0;
        for (const auto& [e, c] : fold)
            for (int v : e) mx = std::max(mx, v);
        return (unsigned)mx;
    }
};

// G evaluated literally from its definition, for cross-checking the
// symmetric reduction on the unit circle.
inline std::complex<double> eval_G_direct(const std::vector<i64>& n_list,
                                          const std::vector<std::complex<double>>& x) {
    auto ipow = [](std::complex<double> b, u64 e) {
        std::complex<double> r = 1.0;
        while (e) {
            if (e & 1) r *= b;
            b *= b;
            e >>= 1;
        }
        return r;
    };
    const size_t r = n_list.size();
    std::complex<double> total = 1.0;
    for (u64 mask = 0; mask < (1ull << r); ++mask) {
        std::complex<double> mono = 1.0;
        for (size_t j = 0; j < r; ++j) {
            i64 e = (mask >> j & 1) ? -n_list[j] : n_list[j];
            std::complex<double> p = ipow(x[j], (u64)(e > 0 ? e : -e));
            mono *= (e > 0) ? p : 1.0 / p;
        }
        total *= mono - 1.0;
    }
    return total;
}

inline ObstructionPolynomial build_F(const std::vector<i64>& a_list, const std::vector<i64>& n_list) {
    const size_t r = a_list.size();
    if (r == 0 || r > 8 || n_list.size() != r) throw precondition_error("build_F: need 1..8 matched (a, n) pairs");
    for (i64 n : n_list)
        if (n == 0) throw precondition_error("build_F: n_j must be nonzero");
    for (i64 a : a_list)
        if (a == 0) throw precondition_error("build_F: a_j must be nonzero");
    for (size_t i = 0; i < r; ++i)
        for (size_t j = i + 1; j < r; ++j)
            if (a_list[i] == a_list[j])
                throw precondition_error("build_F: a_j must be pairwise distinct (repeats can make F vanish)");

    // expand G as a Laurent polynomial
    std::map<std::vector<int>, i64> laurent{{std::vector<int>(r, 0), 1}};
    for (u64 mask = 0; mask < (1ull << r); ++mask) {
        std::vector<int> key(r);
        for (size_t j = 0; j < r; ++j) key[j] = (mask >> j & 1) ? (int)-n_list[j] : (int)n_list[j];
        std::map<std::vector<int>, i64> next;
        for (const auto& [e, c] : laurent) {
            std::vector<int> shifted(r);
            for (size_t j = 0; j < r; ++j) shifted[j] = e[j] + key[j];
            next[shifted] += c;
            next[e] -= c;
        }
        std::erase_if(next, [](const auto& kv) { return kv.second == 0; });
        laurent = std::move(next);
    }

    // fold onto nonnegative exponents; G is invariant under every
    // x_j -> x_j^{-1} (sign patterns permute), checked here
    ObstructionPolynomial F;
    for (const auto& [e, c] : laurent) {
        std::vector<int> abs_e(r);
        for (size_t j = 0; j < r; ++j) abs_e[j] = e[j] < 0 ? -e[j] : e[j];
        auto it = laurent.find(abs_e);
        if (it == laurent.end() || it->second != c)
            throw std::logic_error("build_F: expansion lost x -> 1/x symmetry");
        if (abs_e == e) F.fold.emplace_back(e, c);
    }

    // substitute s_j = t / a_j with exact rationals
    auto cheb = detail::cheb_polys(F.max_fold_exp());
    RationalPoly total;
    for (const auto& [e, c] : F.fold) {
        RationalPoly term{Fraction{c, 1}};
        for (size_t j = 0; j < r; ++j) {
            if (e[j] == 0) continue;
            const auto& pc = cheb[(unsigned)e[j]];
            RationalPoly pj(pc.size());
            Fraction inv_a{1, 1};
            for (size_t v = 0; v < pc.size(); ++v) {
                pj[v] = Fraction{pc[v], 1} * inv_a;
                inv_a = inv_a * Fraction::make(1, a_list[j]);
            }
            term = detail::poly_mul(term, pj);
        }
        total = detail::poly_add(total, term);
    }
    while (!total.empty() && total.back().is_zero()) total.pop_back();
    if (total.empty()) throw std::logic_error("build_F: F vanished for distinct a_j");
    F.coeffs = total;
    F.degree = (unsigned)(total.size() - 1);

    i64 d = 1;
    for (const auto& f : F.coeffs) d = std::lcm(d, f.den);
    F.denominator = d;
    for (const auto& f : F.coeffs) F.cleared.push_back(f.num * (d / f.den));
    return F;
}

// (denominator * F)(t) mod p^l; valid whenever p does not divide the
// cleared denominator.
inline u64 eval_F_mod(const ObstructionPolynomial& F, u64 t, u64 p, u32 l) {
    if ((u64)(F.denominator % (i64)p) == 0) throw precondition_error("eval_F_mod: p divides the denominator");
    const u64 pl = detail::pow_u64(p, l);
    u64 acc = 0;
    for (size_t i = F.cleared.size(); i-- > 0;) acc = (mulmod(acc, t % pl, pl) + reduce_signed(F.cleared[i], pl)) % pl;
    return acc;
}

}  // namespace kpp
