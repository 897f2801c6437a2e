#pragma once

// K_q(a,b,chi) = sum over units x of e_q(ax + b x^{-1}) chi(x), evaluated two
// ways: direct O(q) summation (the oracle) and the closed forms that restrict
// the sum to the roots of h(x) = a x^2 + t_chi x - b mod p^l, with a
// quadratic Gauss factor appearing for odd k. Every term's angle is an exact
// rational multiple of 2*pi with denominator lcm(q, phi); conversion to
// floating point happens once per term, so there is no accumulated drift.

#include <cmath>
#include <complex>
#include <optional>
#include <thread>

#include "kpp/characters.hpp"
#include "kpp/numeric.hpp"

namespace kpp {

enum class KMethod { brute, closed_even, closed_odd, untwisted_formula };

struct KloostermanValue {
    double re = 0.0;
    double im = 0.0;
    KMethod method = KMethod::brute;
    u64 q = 0;
    // in_S: t_chi^2 + 4ab != 0 mod p, the hypothesis of the 2*sqrt(q) bound;
    // for b = -a this is exactly t_chi != +-2a mod p.
    bool in_S = false;
    bool degenerate_disc = false;

    double abs() const { return std::hypot(re, im); }
};

namespace detail {

inline double two_pi() { return 2.0 * std::numbers::pi; }

// exp(2 pi i num / den)
inline std::complex<double> unit_angle(u64 num, u64 den) {
    double a = two_pi() * ((double)num / (double)den);
    return {std::cos(a), std::sin(a)};
}

struct AngleBasis {
    u64 lc;  // lcm(q, phi) = q (p - 1)
    u64 wq;  // lc / q
    u64 wphi;  // lc / phi
};

inline AngleBasis angle_basis(const PrimePowerModulus& m) {
    u64 lc = m.q * (m.p - 1);
    return {lc, lc / m.q, lc / m.phi};
}

// disc(h) = t^2 + 4ab mod p for h(x) = a x^2 + t x - b
inline u64 h_disc_mod_p(u64 t, u64 ar, u64 br, u64 p) {
    return (u64)(((u128)t * t + (u128)4 * (ar % p) % p * (br % p)) % p);
}

}  // namespace detail

// Direct phi(q)-term summation; the oracle everything else is tested against.
inline KloostermanValue ksum_brute(const Character& chi, i64 a, i64 b) {
    const auto& mod = chi.modulus();
    if (reduce_signed(a, mod.p) == 0 || reduce_signed(b, mod.p) == 0)
        throw precondition_error("ksum_brute: a and b must be units mod p");
    const u64 q = mod.q, phi = mod.phi, m = chi.index();
    const u64 ar = reduce_signed(a, q), br = reduce_signed(b, q);
    const u64 g = chi.dlog().generator(), ginv = invmod(g, q);
    const auto ab = detail::angle_basis(mod);

    std::complex<double> acc = 0.0;
    u64 x = 1, xinv = 1, me = 0;
    for (u64 e = 0; e < phi; ++e) {
        u64 n1 = (u64)(((u128)ar * x + (u128)br * xinv) % q);
        u64 num = (n1 * ab.wq + me * ab.wphi) % ab.lc;
        acc += detail::unit_angle(num, ab.lc);
        x = mulmod(x, g, q);
        xinv = mulmod(xinv, ginv, q);
        me += m;
        if (me >= phi) me -= phi;
    }

    KloostermanValue v{acc.real(), acc.imag(), KMethod::brute, q};
    if (mod.k >= 2) {
        u64 t = char_t(chi, false).value;
        v.degenerate_disc = detail::h_disc_mod_p(t, ar, br, mod.p) == 0;
        v.in_S = !v.degenerate_disc;
    }
    return v;
}

// G(x) = sum_{y mod p} e_p(d(x) y^2 + p^{-l} h(x) y) with
// d(x) = ((p-1)/2) t x^2 + b x. |G| = sqrt(p) when d != 0 mod p; when d = 0,
// G is p (lin = 0) or 0 (lin != 0).
struct GaussFactor {
    u64 x = 0;
    u64 d = 0;    // mod p
    u64 lin = 0;  // p^{-l} h(x) mod p
    std::complex<double> value;
    double angle = 0.0;  // arg(value / sqrt(p)), in (-pi, pi]
};

inline GaussFactor gauss_factor(u64 p, u32 l, u64 t, u64 ar, u64 br, u64 x) {
    const u64 pl = detail::pow_u64(p, l);
    const u64 pl1 = pl * p;
    u64 h = (u64)((((u128)ar * x % pl1) * x + (u128)t * x + (pl1 - br % pl1)) % pl1);
    if (h % pl != 0) throw precondition_error("gauss_factor: x is not a root of h mod p^l");
    GaussFactor gf;
    gf.x = x;
    gf.lin = (h / pl) % p;
    gf.d = (u64)((((u128)((p - 1) / 2) * (t % p) % p) * (x % p) % p * (x % p) + (u128)(br % p) * (x % p)) % p);
    std::complex<double> acc = 0.0;
    for (u64 y = 0; y < p; ++y) {
        u64 num = (u64)(((u128)gf.d * y % p * y + (u128)gf.lin * y) % p);
        acc += detail::unit_angle(num, p);
    }
    gf.value = acc;
    gf.angle = (std::abs(acc) == 0.0) ? 0.0 : std::atan2(acc.imag(), acc.real());
    return gf;
}

// Closed form: K = p^l * sum over roots x of h mod p^l of
// e_q(a x + b x^{-1}) chi(x) [ * G(x) for odd k ], roots taken at their
// canonical lift in [0, p^l).
inline KloostermanValue ksum_closed(const Character& chi, i64 a, i64 b) {
    const auto& mod = chi.modulus();
    if (mod.k < 2) throw precondition_error("ksum_closed: requires k >= 2 (use ksum_brute for k = 1)");
    if (reduce_signed(a, mod.p) == 0 || reduce_signed(b, mod.p) == 0)
        throw precondition_error("ksum_closed: a and b must be units mod p");
    const u64 q = mod.q, phi = mod.phi, p = mod.p, pl = mod.pl(), m = chi.index();
    const u64 ar = reduce_signed(a, q), br = reduce_signed(b, q);
    const bool odd_k = mod.k % 2 != 0;
    const auto ab = detail::angle_basis(mod);
    const TChi t = char_t(chi, false);

    auto roots = lift_quadratic_roots(ar % pl, t.value % pl, br % pl, p, mod.l);
    std::complex<double> acc = 0.0;
    for (u64 x : roots) {
        u64 xinv = invmod(x, q);
        u64 n1 = (u64)(((u128)ar * x + (u128)br * xinv) % q);
        u64 num = (n1 * ab.wq + mulmod(m, chi.dlog().log(x), phi) * ab.wphi) % ab.lc;
        std::complex<double> term = detail::unit_angle(num, ab.lc);
        if (odd_k) term *= gauss_factor(p, mod.l, t.value, ar, br, x).value;
        acc += term;
    }
    acc *= (double)pl;

    KloostermanValue v{acc.real(), acc.imag(), odd_k ? KMethod::closed_odd : KMethod::closed_even, q};
    v.degenerate_disc = detail::h_disc_mod_p(t.value, ar, br, p) == 0;
    v.in_S = !v.degenerate_disc;
    return v;
}

// Normalized sum 2cos-parametrized: kappa = q^{-1/2} K_q(a, -a, chi).
struct NormalizedTwisted {
    double kappa = 0.0;
    std::optional<double> theta;  // kappa = 2 cos(theta) when |kappa| <= 2
};

inline NormalizedTwisted make_normalized(double kappa) {
    NormalizedTwisted n{kappa, std::nullopt};
    if (std::abs(kappa) <= 2.0) n.theta = std::acos(kappa / 2.0);
    return n;
}

inline NormalizedTwisted normalized_twisted(const Character& chi, i64 a) {
    const auto& mod = chi.modulus();
    KloostermanValue v = mod.k >= 2 ? ksum_closed(chi, a, -a) : ksum_brute(chi, a, -a);
    double sq = std::sqrt((double)mod.q);
    if (std::abs(v.im) > 1e-8 * sq) throw std::logic_error("normalized_twisted: sum is not real");
    return make_normalized(v.re / sq);
}

// Untwisted prime-power case K_q(a,1,1): exactly 0 when a is a non-square
// mod q; otherwise evaluated through the closed form with trivial chi, which
// realizes the sign concretely. For even k the value is 2 sqrt(q) cos(4 pi c/q)
// with c^2 = a mod q.
inline KloostermanValue untwisted_closed(const DlogTable& table, i64 a) {
    const auto& mod = table.modulus();
    if (mod.k < 2) throw precondition_error("untwisted_closed: requires k >= 2");
    if (reduce_signed(a, mod.p) == 0) throw precondition_error("untwisted_closed: a must be a unit mod p");
    if (legendre((i64)reduce_signed(a, mod.p), mod.p) != 1) {
        KloostermanValue zero{0.0, 0.0, KMethod::untwisted_formula, mod.q};
        zero.in_S = true;
        return zero;
    }
    KloostermanValue v = ksum_closed(Character(table, 0), a, 1);
    v.method = KMethod::untwisted_formula;
    return v;
}

// Salie sums: the twisted prime case K_p(a, 1, chi_2) with chi_2 the
// quadratic character (index (p-1)/2), by direct summation.
inline std::vector<KloostermanValue> salie_values(const DlogTable& table, const std::vector<i64>& a_range) {
    const auto& mod = table.modulus();
    if (mod.k != 1) throw precondition_error("salie_values: modulus must be a prime (k = 1)");
    Character chi2(table, (mod.p - 1) / 2);
    std::vector<KloostermanValue> out;
    out.reserve(a_range.size());
    for (i64 a : a_range) out.push_back(ksum_brute(chi2, a, 1));
    return out;
}

// One row per character of the b = -a family, indexed by chi.
struct FamilyEntry {
    u64 chi_index = 0;
    u64 t = 0;          // t_chi mod p^(k-l)
    bool in_S = false;  // t != +-2a mod p
    double kappa = 0.0;
    std::optional<double> theta;
};

// All phi(q) normalized values for fixed a, b = -a. Fast path (k >= 2)
// groups characters into cosets of constant t_chi: the h-roots and Gauss
// factors are computed once per t and reused across the p^l... coset. Total
// cost O(q). Partitioning the t-range over workers is deterministic: each
// coset writes disjoint indices of the result.
inline std::vector<FamilyEntry> family_values(const DlogTable& table, i64 a, unsigned workers = 1) {
    const auto& mod = table.modulus();
    if (reduce_signed(a, mod.p) == 0) throw precondition_error("family_values: a must be a unit mod p");
    const u64 q = mod.q, phi = mod.phi, p = mod.p;
    const double sq = std::sqrt((double)q);
    std::vector<FamilyEntry> out(phi);

    if (mod.k < 2) {  // no t structure at k = 1; brute force per character
        for (u64 m = 0; m < phi; ++m) {
            KloostermanValue v = ksum_brute(Character(table, m), a, -a);
            auto n = make_normalized(v.re / sq);
            out[m] = {m, 0, true, n.kappa, n.theta};
        }
        return out;
    }

    const u64 pl = mod.pl();
    const u64 ar = reduce_signed(a, q), br = reduce_signed(-a, q);
    const bool odd_k = mod.k % 2 != 0;
    const auto ab = detail::angle_basis(mod);
    const auto ex = detail::t_extraction(table);
    const u64 vinv = invmod(ex.t_unit, ex.tmod);
    const u64 coset = phi / ex.tmod;
    const std::vector<i64> a_list{a};

    auto run_range = [&](u64 t_lo, u64 t_hi) {
        for (u64 t = t_lo; t < t_hi; ++t) {
            const u64 m0 = mulmod(t, vinv, ex.tmod);
            const bool s = in_S_residue(t % p, a_list, p);
            auto roots = lift_quadratic_roots(ar % pl, t % pl, br % pl, p, mod.l);
            struct RootData {
                u64 n1, lx;
                std::complex<double> g;
            };
            std::vector<RootData> rd;
            rd.reserve(roots.size());
            for (u64 x : roots) {
                u64 n1 = (u64)(((u128)ar * x + (u128)br * invmod(x, q)) % q);
                std::complex<double> g = odd_k ? gauss_factor(p, mod.l, t, ar, br, x).value : 1.0;
                rd.push_back({n1, table.log(x), g});
            }
            for (u64 i = 0; i < coset; ++i) {
                const u64 m = m0 + i * ex.tmod;
                std::complex<double> acc = 0.0;
                for (const auto& r : rd) {
                    u64 num = (r.n1 * ab.wq + mulmod(m, r.lx, phi) * ab.wphi) % ab.lc;
                    acc += detail::unit_angle(num, ab.lc) * r.g;
                }
                double kappa = rd.empty() ? 0.0 : acc.real() * (double)pl / sq;
                auto n = make_normalized(kappa);
                out[m] = {m, t, s, n.kappa, n.theta};
            }
        }
    };

    if (workers <= 1 || ex.tmod < 2 * workers) {
        run_range(0, ex.tmod);
    } else {
        std::vector<std::thread> pool;
        u64 chunk = (ex.tmod + workers - 1) / workers;
        for (unsigned w = 0; w < workers; ++w) {
            u64 lo = w * chunk, hi = std::min(ex.tmod, lo + chunk);
            if (lo >= hi) break;
            pool.emplace_back(run_range, lo, hi);
        }
        for (auto& th : pool) th.join();
    }
    return out;
}

// (1/q) sum over chi in S_q of prod_j kappa(a_j, chi)^{m_j}, exactly the
// normalization of the moment identity (divide by q, sum restricted to S_q);
// the |S_q| normalization is reported alongside. S_q avoids +-2 a_j mod p
// for every j. Single pass over characters; t_chi shared across the a_j.
struct JointMoment {
    double over_q = 0.0;
    double over_S = 0.0;
    u64 n_in_S = 0;
};

inline JointMoment joint_moment(const DlogTable& table, const std::vector<i64>& a_list,
                                const std::vector<u32>& m_list, unsigned workers = 1) {
    const auto& mod = table.modulus();
    if (a_list.empty() || a_list.size() != m_list.size())
        throw precondition_error("joint_moment: a_list and m_list must be nonempty and equal length");
    for (u32 mj : m_list)
        if (mj < 1) throw precondition_error("joint_moment: moments must be >= 1");
    for (size_t i = 0; i < a_list.size(); ++i)
        for (size_t j = i + 1; j < a_list.size(); ++j)
            if (reduce_signed(a_list[i], mod.p) == reduce_signed(a_list[j], mod.p))
                throw precondition_error("joint_moment: a_j must be pairwise distinct mod p");

    std::vector<std::vector<FamilyEntry>> fams;
    fams.reserve(a_list.size());
    for (i64 a : a_list) fams.push_back(family_values(table, a, workers));

    std::vector<double> terms;
    for (u64 m = 0; m < mod.phi; ++m) {
        if (!in_S_residue(fams[0][m].t % mod.p, a_list, mod.p)) continue;
        double prod = 1.0;
        for (size_t j = 0; j < a_list.size(); ++j) {
            double k = fams[j][m].kappa;
            for (u32 e = 0; e < m_list[j]; ++e) prod *= k;
        }
        terms.push_back(prod);
    }
    double s = pairwise_sum(terms);
    JointMoment jm;
    jm.n_in_S = terms.size();
    jm.over_q = s / (double)mod.q;
    jm.over_S = terms.empty() ? 0.0 : s / (double)terms.size();
    return jm;
}

}  // namespace kpp
