// Standalone acceptance runner: one PASS/FAIL line per criterion with the
// measured numbers. `--criterion N` runs a single criterion (ctest registers
// each one separately); no argument runs all ten. Nonzero exit on failure.

#include <cstring>
#include <iostream>

#include "kpp/verify.hpp"

int main(int argc, char** argv) {
    int only = 0;
    for (int i = 1; i < argc; ++i) {
        if (std::strcmp(argv[i], "--criterion") == 0 && i + 1 < argc) {
            only = std::atoi(argv[++i]);
        } else {
            std::cerr << "usage: kpp_acceptance [--criterion N]\n";
            return 1;
        }
    }
    if (only < 0 || only > 10) {
        std::cerr << "usage: kpp_acceptance [--criterion N] with N in 1..10\n";
        return 1;
    }

    bool all_pass = true;
    try {
        std::vector<kpp::verify::CriterionResult> results;
        if (only == 0) {
            results = kpp::verify::run_all();
        } else {
            results.push_back(kpp::verify::run_criterion(only));
        }
        for (const auto& r : results) {
            std::cout << "criterion " << r.id << ": " << (r.pass ? "PASS" : "FAIL") << " - " << r.detail
                      << std::endl;
            if (!r.pass) all_pass = false;
        }
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 4;
    }
    return all_pass ? 0 : 3;
}
