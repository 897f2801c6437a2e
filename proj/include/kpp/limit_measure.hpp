#pragma once

// The limit law mu = (1/2) delta_0 + arcsine density on [-2,2], its
// Sato-Tate companion, exact moments, a sampler through the
// torus-normalizer model, and empirical comparisons (KS distance that
// handles the atom, Stieltjes quadrature, family statistics).

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "kpp/kloosterman.hpp"
#include "kpp/numeric.hpp"

namespace kpp {

enum class Measure { mu, sato_tate };

// mu:        F(x) = 1/2 [x >= 0] + (arcsin(x/2) + pi/2) / (2 pi)
// sato_tate: F(x) = (x sqrt(4-x^2)/2 + 2 arcsin(x/2)) / (2 pi) + 1/2
// Right-continuous; clamps outside [-2, 2].
inline double mu_cdf(double x, Measure v = Measure::mu) {
    if (x <= -2.0) return 0.0;
    if (x >= 2.0) return 1.0;
    if (v == Measure::mu)
        return (x >= 0.0 ? 0.5 : 0.0) + (std::asin(x / 2.0) + std::numbers::pi / 2.0) / (2.0 * std::numbers::pi);
    return (x * std::sqrt(4.0 - x * x) / 2.0 + 2.0 * std::asin(x / 2.0)) / (2.0 * std::numbers::pi) + 0.5;
}

inline double mu_atom(Measure v) { return v == Measure::mu ? 0.5 : 0.0; }

// left limit F(x-)
inline double mu_cdf_left(double x, Measure v = Measure::mu) {
    double f = mu_cdf(x, v);
    if (x == 0.0) f -= mu_atom(v);
    return f;
}

namespace detail {
inline double binom(unsigned n, unsigned k) {
    double r = 1.0;
    for (unsigned i = 1; i <= k; ++i) r = r * (double)(n - k + i) / (double)i;
    return r;
}
}  // namespace detail

// Exact moments: odd ones vanish; mu has int x^{2n} dmu = binom(2n,n)/2,
// sato_tate the Catalan numbers.
inline double mu_moment(unsigned m, Measure v = Measure::mu) {
    if (m == 0) return 1.0;
    if (m % 2 != 0) return 0.0;
    unsigned n = m / 2;
    double central = detail::binom(m, n);
    return v == Measure::mu ? 0.5 * central : central / (double)(n + 1);
}

// int x^m dF by Stieltjes quadrature of the CDF. The substitution
// x = 2 sin(theta) equidistributes the arcsine mass; the atom (a known part
// of the measure's definition) is accumulated separately at x = 0.
inline double stieltjes_moment(unsigned m, Measure v = Measure::mu, unsigned cells = 1u << 16) {
    const double atom = mu_atom(v);
    auto cont = [&](double x) { return mu_cdf(x, v) - (x >= 0.0 ? atom : 0.0); };
    double sum = (m == 0) ? atom : 0.0;
    double prev_theta = -std::numbers::pi / 2.0;
    double prev_f = cont(2.0 * std::sin(prev_theta));
    std::vector<double> terms;
    terms.reserve(cells);
    for (unsigned i = 1; i <= cells; ++i) {
        double theta = -std::numbers::pi / 2.0 + std::numbers::pi * (double)i / (double)cells;
        double f = cont(2.0 * std::sin(theta));
        double xm = 2.0 * std::sin(0.5 * (prev_theta + theta));
        terms.push_back(std::pow(xm, (double)m) * (f - prev_f));
        prev_theta = theta;
        prev_f = f;
    }
    return sum + pairwise_sum(terms);
}

// Samples the trace of a Haar element of the normalizer of a maximal torus
// in SU(2): a fair coin picks the non-identity component (trace 0) or a
// torus element (trace 2 cos(pi U)).
inline std::vector<double> mu_sample(u64 seed, std::size_t n) {
    if (n == 0) throw precondition_error("mu_sample: n must be >= 1");
    std::mt19937_64 rng(seed);
    std::vector<double> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        bool coin = rng() >> 63;
        if (coin) {
            out.push_back(0.0);
        } else {
            double u = (double)(rng() >> 11) * 0x1.0p-53;
            out.push_back(2.0 * std::cos(std::numbers::pi * u));
        }
    }
    return out;
}

// Exact sup |F_emp - F| for a step empirical CDF against mu/sato_tate:
// the sup is attained at a sample value, its left limit, or one side of the
// atom at 0, so those witnesses are enumerated directly. Ties in the sample
// (the zero atom!) are handled by counting multiplicity, not by sorted rank.
inline double ks_distance(std::vector<double> values, Measure v = Measure::mu) {
    if (values.empty()) throw precondition_error("ks_distance: empty family");
    std::sort(values.begin(), values.end());
    const double n = (double)values.size();
    double d = 0.0;
    auto visit = [&](double x) {
        auto lo = std::lower_bound(values.begin(), values.end(), x);
        auto hi = std::upper_bound(values.begin(), values.end(), x);
        double below = (double)(lo - values.begin()) / n;   // F_emp(x-)
        double at_or_below = (double)(hi - values.begin()) / n;  // F_emp(x)
        d = std::max(d, std::abs(at_or_below - mu_cdf(x, v)));
        d = std::max(d, std::abs(below - mu_cdf_left(x, v)));
    };
    visit(0.0);
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i > 0 && values[i] == values[i - 1]) continue;
        visit(values[i]);
    }
    return d;
}

// Statistics of one normalized family at fixed a: S_q-filtered moments
// (both normalizations), exact-zero fraction, KS distance to mu. Terms are
// accumulated in character order and pairwise-summed, so results do not
// depend on how the family was partitioned.
struct FamilyStats {
    u64 q = 0;
    u64 n_characters = 0;
    u64 n_in_S = 0;
    double zero_fraction = 0.0;
    double ks = 0.0;
    std::vector<double> moments_over_q;  // m = 1..8
    std::vector<double> moments_over_S;
};

inline FamilyStats family_stats(const std::vector<FamilyEntry>& fam, u64 q) {
    FamilyStats st;
    st.q = q;
    st.n_characters = fam.size();
    std::vector<double> vals;
    for (const auto& e : fam)
        if (e.in_S) vals.push_back(e.kappa);
    st.n_in_S = vals.size();
    if (vals.empty()) throw precondition_error("family_stats: no S_q characters");
    std::size_t zeros = 0;
    for (double x : vals)
        if (x == 0.0) ++zeros;
    st.zero_fraction = (double)zeros / (double)vals.size();
    st.ks = ks_distance(vals, Measure::mu);
    std::vector<double> pw(vals.size());
    std::vector<double> pow_acc(vals.size(), 1.0);
    for (unsigned m = 1; m <= 8; ++m) {
        for (std::size_t i = 0; i < vals.size(); ++i) {
            pow_acc[i] *= vals[i];
            pw[i] = pow_acc[i];
        }
        double s = pairwise_sum(pw);
        st.moments_over_q.push_back(s / (double)q);
        st.moments_over_S.push_back(s / (double)vals.size());
    }
    return st;
}

}  // namespace kpp
