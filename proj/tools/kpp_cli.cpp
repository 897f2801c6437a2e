// kpp: evaluate twisted Kloosterman sums mod odd prime powers, export
// per-character family statistics, and run the verification suite.
//
// Exit codes: 0 success, 1 usage, 2 precondition violation, 3 verification
// failure, 4 internal error.

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "kpp/verify.hpp"

namespace {

constexpr const char* kVersion = "1.0.0";

using json = nlohmann::ordered_json;
using namespace kpp;

std::string fmt_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

// One output sink: stdout by default, --out redirects.
struct Sink {
    std::string path;
    std::ofstream file;
    std::ostream& stream() {
        if (path.empty()) return std::cout;
        if (!file.is_open()) {
            file.open(path, std::ios::trunc);
            if (!file) throw precondition_error("cannot open output file: " + path);
        }
        return file;
    }
};

json metadata(u64 p, u32 k, u64 q, const json& a, u64 seed) {
    return json{{"p", p}, {"k", k}, {"q", q}, {"a", a}, {"tool_version", kVersion}, {"seed", seed}};
}

u64 elapsed_ms(std::chrono::steady_clock::time_point t0) {
    return (u64)std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - t0)
        .count();
}

void print_eval_line(std::ostream& os, const char* name, const KloostermanValue& v, double ms) {
    os << name << ": re=" << fmt_double(v.re) << " im=" << fmt_double(v.im) << " abs=" << fmt_double(v.abs())
       << " (" << fmt_double(ms) << " ms)\n";
}

int cmd_eval(u64 p, u32 k, i64 a, i64 b, const std::string& chi_arg, Sink& sink) {
    PrimePowerModulus mod(p, k);
    auto table = dlog_for(mod);
    auto& os = sink.stream();

    if (chi_arg == "all") {
        os << "# q=" << mod.q << " a=" << a << " b=" << b << " tool_version=" << kVersion << "\n";
        for (u64 m = 0; m < mod.phi; ++m) {
            Character chi(*table, m);
            KloostermanValue v = k >= 2 ? ksum_closed(chi, a, b) : ksum_brute(chi, a, b);
            os << "chi=" << m << " re=" << fmt_double(v.re) << " im=" << fmt_double(v.im)
               << " abs=" << fmt_double(v.abs()) << " in_S=" << (v.in_S ? 1 : 0) << "\n";
        }
        return 0;
    }

    u64 m = std::stoull(chi_arg);
    Character chi(*table, m);
    os << "q=" << mod.q << " chi=" << m << " a=" << a << " b=" << b << "\n";

    auto t0 = std::chrono::steady_clock::now();
    auto vb = ksum_brute(chi, a, b);
    double ms_brute = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    print_eval_line(os, "brute", vb, ms_brute);

    if (k >= 2) {
        t0 = std::chrono::steady_clock::now();
        auto vc = ksum_closed(chi, a, b);
        double ms_closed =
            std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
        print_eval_line(os, vc.method == KMethod::closed_odd ? "closed_odd" : "closed_even", vc, ms_closed);
        os << "closed_minus_brute=" << fmt_double(std::hypot(vc.re - vb.re, vc.im - vb.im)) << "\n";
    } else {
        os << "closed form requires k >= 2; brute only\n";
    }

    double bound = 2.0 * std::sqrt((double)mod.q);
    os << "in_S=" << (vb.in_S ? 1 : 0) << " degenerate_disc=" << (vb.degenerate_disc ? 1 : 0) << "\n";
    os << "bound=2sqrt(q)=" << fmt_double(bound) << " margin=" << fmt_double(bound - vb.abs()) << "\n";
    return 0;
}

int cmd_family(u64 p, u32 k, i64 a, bool sq_filter, unsigned workers, u64 seed, Sink& sink) {
    PrimePowerModulus mod(p, k);
    auto table = dlog_for(mod);
    auto fam = family_values(*table, a, workers);
    auto& os = sink.stream();
    os << "# p=" << p << "\n# k=" << k << "\n# q=" << mod.q << "\n# a=" << a
       << "\n# tool_version=" << kVersion << "\n# seed=" << seed << "\n";
    os << "chi_index,t_chi,in_S,value,theta\n";
    for (const auto& e : fam) {
        if (sq_filter && !e.in_S) continue;
        os << e.chi_index << "," << e.t << "," << (e.in_S ? 1 : 0) << "," << fmt_double(e.kappa) << ",";
        if (e.theta) os << fmt_double(*e.theta);
        os << "\n";
    }
    return 0;
}

int cmd_dist(u64 p, u32 k, const std::vector<i64>& a_list, const std::vector<u32>& m_list, unsigned workers,
             u64 seed, Sink& sink) {
    PrimePowerModulus mod(p, k);
    auto table = dlog_for(mod);
    auto t0 = std::chrono::steady_clock::now();

    json report;
    if (a_list.size() == 1 && m_list.empty()) {
        auto fam = family_values(*table, a_list[0], workers);
        auto st = family_stats(fam, mod.q);
        report = json{{"metadata", metadata(p, k, mod.q, a_list[0], seed)},
                      {"q", st.q},
                      {"a", a_list[0]},
                      {"n_characters", st.n_characters},
                      {"n_in_S", st.n_in_S},
                      {"excluded_count", st.n_characters - st.n_in_S},
                      {"ks_distance", st.ks},
                      {"zero_fraction", st.zero_fraction},
                      {"moments", json{{"over_q", st.moments_over_q}, {"over_S", st.moments_over_S}}},
                      {"runtime_ms", elapsed_ms(t0)}};
    } else {
        // joint mode: product moments over characters in the common S_q
        auto ml = m_list;
        if (ml.empty()) ml.assign(a_list.size(), 1);
        auto jm = joint_moment(*table, a_list, ml, workers);
        report = json{{"metadata", metadata(p, k, mod.q, a_list, seed)},
                      {"q", mod.q},
                      {"a", a_list},
                      {"m_list", ml},
                      {"n_characters", mod.phi},
                      {"n_in_S", jm.n_in_S},
                      {"excluded_count", mod.phi - jm.n_in_S},
                      {"moments", json{{"over_q", jm.over_q}, {"over_S", jm.over_S}}},
                      {"runtime_ms", elapsed_ms(t0)}};
    }
    sink.stream() << report.dump(2) << "\n";
    return 0;
}

int cmd_count(u64 p, u32 l, const std::vector<i64>& a_list, const std::vector<i64>& n_list, u64 seed,
              Sink& sink) {
    CountingSpec spec{p, l, a_list, n_list};
    auto t0 = std::chrono::steady_clock::now();
    u64 n_enum = enum_Yprime(spec).size();
    u64 n_formula = count_Yprime_char(spec);
    double pl = std::pow((double)p, (double)l);
    double r = (double)a_list.size();
    json report{{"metadata", json{{"p", p}, {"l", l}, {"a_list", a_list}, {"n_list", n_list},
                                  {"tool_version", kVersion}, {"seed", seed}}},
                {"p", p},
                {"l", l},
                {"a_list", a_list},
                {"yprime_enum", n_enum},
                {"yprime_formula", n_formula},
                {"yprime_rel_dev", std::abs((double)n_enum / pl - 1.0)},
                {"yprime_band", r * std::pow(2.0, r) / std::sqrt((double)p)}};

    if (!n_list.empty()) {
        auto F = build_F(a_list, n_list);
        auto y0 = enum_Y0(spec, false);
        auto yp0 = enum_Y0(spec, true);
        bool vanish = true;
        for (const auto& s : yp0)
            if (eval_F_mod(F, s.t, p, l) != 0) vanish = false;
        u64 bound = (1ull << a_list.size()) * F.degree * kpp::detail::pow_u64(p, l - 1);
        report["n_list"] = n_list;
        report["y0"] = y0.size();
        report["yprime0"] = yp0.size();
        report["F"] = json{{"cleared", F.cleared}, {"denominator", F.denominator}, {"degree", F.degree}};
        report["f_vanishes_on_yprime0"] = vanish;
        report["yprime0_bound"] = bound;
    }
    report["runtime_ms"] = elapsed_ms(t0);
    sink.stream() << report.dump(2) << "\n";
    return 0;
}

int cmd_verify(int criterion, Sink& sink) {
    auto& os = sink.stream();
    std::vector<kpp::verify::CriterionResult> results;
    if (criterion == 0) {
        results = kpp::verify::run_all();
    } else {
        results.push_back(kpp::verify::run_criterion(criterion));
    }
    bool all_pass = true;
    for (const auto& r : results) {
        os << "criterion " << r.id << ": " << (r.pass ? "PASS" : "FAIL") << " - " << r.detail << "\n";
        if (!r.pass) all_pass = false;
    }
    return all_pass ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"twisted Kloosterman sums mod odd prime powers: evaluation, families, statistics"};
    app.require_subcommand(1);

    u64 p = 0, seed = 0;
    u32 k = 2, l = 1;
    i64 a = 1, b = 1;
    std::string chi_arg = "0", out_path;
    std::vector<i64> a_list, n_list;
    std::vector<u32> m_list;
    unsigned workers = 1;
    bool sq_filter = false;
    int criterion = 0;

    auto* eval = app.add_subcommand("eval", "evaluate one K_q(a,b,chi) by both methods");
    eval->add_option("--p", p, "odd prime")->required();
    eval->add_option("--k", k, "exponent, q = p^k")->required();
    eval->add_option("--a", a, "coefficient a (unit mod p)")->required();
    eval->add_option("--b", b, "coefficient b (unit mod p)")->required();
    eval->add_option("--chi", chi_arg, "character index, or 'all'");
    eval->add_option("--out", out_path, "write to file instead of stdout");

    auto* family = app.add_subcommand("family", "CSV of normalized values for all characters, b = -a");
    family->add_option("--p", p, "odd prime")->required();
    family->add_option("--k", k, "exponent, q = p^k")->required();
    family->add_option("--a", a, "coefficient a (unit mod p)")->required();
    family->add_flag("--sq-filter", sq_filter, "emit only S_q rows");
    family->add_option("--workers", workers, "worker threads (output independent of this)");
    family->add_option("--seed", seed, "recorded in metadata");
    family->add_option("--out", out_path, "write to file instead of stdout");

    auto* dist = app.add_subcommand("dist", "JSON distribution/moment report for the b = -a family");
    dist->add_option("--p", p, "odd prime")->required();
    dist->add_option("--k", k, "exponent, q = p^k")->required();
    dist->add_option("--a", a_list, "coefficient(s); several values switch to the joint report")
        ->required()
        ->delimiter(',');
    dist->add_option("--m", m_list, "joint moment orders, one per a")->delimiter(',');
    dist->add_option("--workers", workers, "worker threads (output independent of this)");
    dist->add_option("--seed", seed, "recorded in metadata");
    dist->add_option("--out", out_path, "write to file instead of stdout");

    auto* count = app.add_subcommand("count", "solution counts Y'/Y_0 and the obstruction polynomial");
    count->add_option("--p", p, "odd prime")->required();
    count->add_option("--l", l, "exponent of the modulus p^l")->required();
    count->add_option("--a", a_list, "coefficients a_1..a_r")->required()->delimiter(',');
    count->add_option("--n", n_list, "monomial exponents n_1..n_r (enables Y_0 and F)")->delimiter(',');
    count->add_option("--seed", seed, "recorded in metadata");
    count->add_option("--out", out_path, "write to file instead of stdout");

    auto* verify = app.add_subcommand("verify", "run the acceptance suite (nonzero exit on failure)");
    verify->add_option("--criterion", criterion, "run one criterion 1..10 instead of all")
        ->check(CLI::Range(1, 10));
    verify->add_option("--out", out_path, "write to file instead of stdout");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);  // prints the message; usage errors are exit class 1
        return 1;
    }

    Sink sink{out_path, {}};
    try {
        if (*eval) return cmd_eval(p, k, a, b, chi_arg, sink);
        if (*family) return cmd_family(p, k, a, sq_filter, workers, seed, sink);
        if (*dist) return cmd_dist(p, k, a_list, m_list, workers, seed, sink);
        if (*count) return cmd_count(p, l, a_list, n_list, seed, sink);
        if (*verify) return cmd_verify(criterion, sink);
    } catch (const precondition_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: invalid argument: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 4;
    }
    return 1;
}
