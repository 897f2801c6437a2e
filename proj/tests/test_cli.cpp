#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>
#include <string>

#include <json.hpp>

#include "kpp/kloosterman.hpp"

using json = nlohmann::json;
using namespace kpp;

namespace {

struct CliResult {
    int exit_code;
    std::string out;
};

// Runs the CLI with stderr dropped; stdout and exit status are the contract.
CliResult run_cli(const std::string& args) {
    std::string cmd = std::string(KPP_CLI_BIN) + " " + args + " 2>/dev/null";
    FILE* pipe = popen(cmd.c_str(), "r");
    EXPECT_NE(pipe, nullptr);
    std::string out;
    char buf[4096];
    size_t n;
    while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) out.append(buf, n);
    int status = pclose(pipe);
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

std::vector<std::string> lines_of(const std::string& s) {
    std::vector<std::string> ls;
    std::istringstream in(s);
    std::string line;
    while (std::getline(in, line)) ls.push_back(line);
    return ls;
}

std::string drop_runtime(std::string s) {
    return std::regex_replace(s, std::regex("\"runtime_ms\": [0-9]+"), "\"runtime_ms\": 0");
}

}  // namespace

TEST(Cli, EvalWorkedExample) {
    auto r = run_cli("eval --p 3 --k 2 --a 1 --b 1 --chi 0");
    ASSERT_EQ(r.exit_code, 0);
    std::smatch m;
    ASSERT_TRUE(std::regex_search(r.out, m, std::regex("brute: re=([-0-9.e+]+) im=")));
    EXPECT_NEAR(std::stod(m[1]), 1.04189, 1e-4);
    EXPECT_NE(r.out.find("closed_even:"), std::string::npos);
    EXPECT_NE(r.out.find("margin="), std::string::npos);

    auto all = run_cli("eval --p 3 --k 2 --a 1 --b 1 --chi all");
    ASSERT_EQ(all.exit_code, 0);
    u64 rows = 0;
    for (const auto& l : lines_of(all.out))
        if (l.rfind("chi=", 0) == 0) ++rows;
    EXPECT_EQ(rows, 6u);
}

TEST(Cli, FamilyCsvSchemaAndRoundTrip) {
    auto r = run_cli("family --p 7 --k 2 --a 1");
    ASSERT_EQ(r.exit_code, 0);
    auto ls = lines_of(r.out);

    // metadata block, then the pinned header
    EXPECT_NE(r.out.find("# p=7"), std::string::npos);
    EXPECT_NE(r.out.find("# q=49"), std::string::npos);
    EXPECT_NE(r.out.find("# tool_version=1.0.0"), std::string::npos);
    EXPECT_NE(r.out.find("# seed=0"), std::string::npos);
    size_t header_at = 0;
    while (header_at < ls.size() && ls[header_at].rfind("#", 0) == 0) ++header_at;
    ASSERT_LT(header_at, ls.size());
    EXPECT_EQ(ls[header_at], "chi_index,t_chi,in_S,value,theta");

    // rows round-trip exactly against the library
    PrimePowerModulus mod(7, 2);
    DlogTable table(mod);
    auto fam = family_values(table, 1);
    u64 row = 0;
    for (size_t i = header_at + 1; i < ls.size(); ++i, ++row) {
        std::istringstream ss(ls[i]);
        std::string f[5];
        for (int j = 0; j < 5; ++j) std::getline(ss, f[j], ',');
        ASSERT_LT(row, fam.size());
        EXPECT_EQ(std::stoull(f[0]), fam[row].chi_index);
        EXPECT_EQ(std::stoull(f[1]), fam[row].t);
        EXPECT_EQ(f[2] == "1", fam[row].in_S);
        EXPECT_EQ(std::strtod(f[3].c_str(), nullptr), fam[row].kappa);  // %.17g round-trips
        if (fam[row].theta)
            EXPECT_EQ(std::strtod(f[4].c_str(), nullptr), *fam[row].theta);
        else
            EXPECT_TRUE(f[4].empty());
    }
    EXPECT_EQ(row, fam.size());

    // S_q filter drops exactly the excluded characters
    auto filtered = run_cli("family --p 7 --k 2 --a 1 --sq-filter");
    u64 kept = 0;
    for (const auto& l : lines_of(filtered.out))
        if (!l.empty() && l[0] != '#' && l.rfind("chi_index", 0) != 0) ++kept;
    u64 expect = 0;
    for (const auto& e : fam)
        if (e.in_S) ++expect;
    EXPECT_EQ(kept, expect);
}

TEST(Cli, FamilyWorkerCountInvisible) {
    auto r1 = run_cli("family --p 13 --k 2 --a 2 --workers 1");
    auto r3 = run_cli("family --p 13 --k 2 --a 2 --workers 3");
    ASSERT_EQ(r1.exit_code, 0);
    ASSERT_EQ(r3.exit_code, 0);
    EXPECT_EQ(r1.out, r3.out);
}

TEST(Cli, DistReportKeysAndOracle) {
    auto r = run_cli("dist --p 997 --k 2 --a 1 --workers 4");
    ASSERT_EQ(r.exit_code, 0);
    auto j = json::parse(r.out);
    for (const char* key : {"q", "a", "n_characters", "n_in_S", "ks_distance", "zero_fraction", "moments",
                            "runtime_ms", "metadata", "excluded_count"})
        EXPECT_TRUE(j.contains(key)) << key;
    EXPECT_EQ(j["q"], 994009);
    EXPECT_EQ(j["metadata"]["tool_version"], "1.0.0");
    EXPECT_NEAR(j["zero_fraction"].get<double>(), 0.5, 0.05);
    ASSERT_EQ(j["moments"]["over_q"].size(), 8u);
    ASSERT_EQ(j["moments"]["over_S"].size(), 8u);
    EXPECT_NEAR(j["moments"]["over_q"][1].get<double>(), 1.0, 0.05);
    EXPECT_EQ(j["n_characters"].get<u64>(), j["n_in_S"].get<u64>() + j["excluded_count"].get<u64>());
}

TEST(Cli, DistJointMode) {
    auto r = run_cli("dist --p 13 --k 2 --a 1,2 --m 2,2");
    ASSERT_EQ(r.exit_code, 0);
    auto j = json::parse(r.out);
    EXPECT_EQ(j["a"], (std::vector<i64>{1, 2}));
    EXPECT_EQ(j["m_list"], (std::vector<u32>{2, 2}));
    EXPECT_TRUE(j.contains("moments"));
    EXPECT_TRUE(j["moments"].contains("over_q"));

    PrimePowerModulus mod(13, 2);
    DlogTable table(mod);
    auto jm = joint_moment(table, {1, 2}, {2, 2});
    EXPECT_DOUBLE_EQ(j["moments"]["over_q"].get<double>(), jm.over_q);
}

TEST(Cli, Determinism) {
    auto a = run_cli("dist --p 101 --k 2 --a 1 --seed 5");
    auto b = run_cli("dist --p 101 --k 2 --a 1 --seed 5");
    ASSERT_EQ(a.exit_code, 0);
    // runtime_ms is wall-clock and exempt; everything else is byte-identical
    EXPECT_EQ(drop_runtime(a.out), drop_runtime(b.out));

    auto f1 = run_cli("family --p 11 --k 2 --a 1 --seed 9");
    auto f2 = run_cli("family --p 11 --k 2 --a 1 --seed 9");
    EXPECT_EQ(f1.out, f2.out);
}

TEST(Cli, CountReport) {
    auto r = run_cli("count --p 11 --l 1 --a 1,2 --n 1,-1");
    ASSERT_EQ(r.exit_code, 0);
    auto j = json::parse(r.out);
    EXPECT_EQ(j["yprime_enum"], j["yprime_formula"]);
    EXPECT_EQ(j["F"]["cleared"], (std::vector<i64>{0, 0, 1}));
    EXPECT_EQ(j["F"]["denominator"], 4);
    EXPECT_LE(j["F"]["degree"].get<u32>(), 4u);
    EXPECT_TRUE(j["f_vanishes_on_yprime0"].get<bool>());
    EXPECT_LE(j["yprime0"].get<u64>(), j["yprime0_bound"].get<u64>());

    auto plain = run_cli("count --p 11 --l 2 --a 1");
    auto pj = json::parse(plain.out);
    EXPECT_EQ(pj["yprime_enum"], pj["yprime_formula"]);
    EXPECT_FALSE(pj.contains("F"));
}

TEST(Cli, ExitCodes) {
    EXPECT_EQ(run_cli("eval --p 3").exit_code, 1);                          // missing required flags
    EXPECT_EQ(run_cli("nonsense").exit_code, 1);                            // unknown subcommand
    EXPECT_EQ(run_cli("verify --criterion 11").exit_code, 1);               // out of range
    EXPECT_EQ(run_cli("eval --p 9 --k 2 --a 1 --b 1").exit_code, 2);        // 9 is not prime
    EXPECT_EQ(run_cli("eval --p 5 --k 2 --a 5 --b 1").exit_code, 2);        // a not a unit
    EXPECT_EQ(run_cli("dist --p 13 --k 2 --a 1,14").exit_code, 2);          // repeated a mod p
    EXPECT_EQ(run_cli("count --p 15 --l 1 --a 1").exit_code, 2);            // composite p
}

TEST(Cli, VerifySingleCriterionPassesAndFails) {
    auto pass = run_cli("verify --criterion 10");
    EXPECT_EQ(pass.exit_code, 0);
    EXPECT_NE(pass.out.find("criterion 10: PASS"), std::string::npos);

    // criterion 4 is red by design: at q = 27 the measured untwisted values
    // follow the quarter-period-shifted form (see the acceptance notes)
    auto fail = run_cli("verify --criterion 4");
    EXPECT_EQ(fail.exit_code, 3);
    EXPECT_NE(fail.out.find("criterion 4: FAIL"), std::string::npos);
}

TEST(Cli, CacheDirIsUsedAndHarmless) {
    namespace fs = std::filesystem;
    auto dir = fs::temp_directory_path() / "kpp_cli_cache_test";
    fs::remove_all(dir);
    setenv("KPP_CACHE_DIR", dir.c_str(), 1);
    auto a = run_cli("family --p 11 --k 2 --a 1");
    EXPECT_TRUE(fs::exists(dir / "dlog_11_2.bin"));
    auto b = run_cli("family --p 11 --k 2 --a 1");  // served from cache
    unsetenv("KPP_CACHE_DIR");
    EXPECT_EQ(a.out, b.out);
    ASSERT_EQ(a.exit_code, 0);
    auto c = run_cli("family --p 11 --k 2 --a 1");  // no cache dir
    EXPECT_EQ(a.out, c.out);
    fs::remove_all(dir);
}

TEST(Cli, OutFlagWritesFile) {
    namespace fs = std::filesystem;
    auto path = fs::temp_directory_path() / "kpp_out_test.csv";
    fs::remove(path);
    auto r = run_cli("family --p 5 --k 2 --a 1 --out " + path.string());
    ASSERT_EQ(r.exit_code, 0);
    EXPECT_TRUE(r.out.empty());
    ASSERT_TRUE(fs::exists(path));
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    EXPECT_NE(ss.str().find("chi_index,t_chi,in_S,value,theta"), std::string::npos);
    fs::remove(path);
}
