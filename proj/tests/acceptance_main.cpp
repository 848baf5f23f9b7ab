// One line per acceptance criterion; exit status 0 only when all pass.
// Optional arguments select criteria by id or name (same as --only).
#include <exception>
#include <iostream>
#include <string>

#include "aniso_tools/acceptance.hpp"

int main(int argc, char** argv) {
    aniso::tools::AcceptanceOptions options;
    for (int i = 1; i < argc; ++i) options.only.emplace_back(argv[i]);
    try {
        const auto outcomes = aniso::tools::run_acceptance(options);
        int failed = 0;
        for (const auto& o : outcomes) {
            std::cout << aniso::tools::format_outcome(o) << std::endl;
            if (!o.pass) ++failed;
        }
        std::cout << (failed == 0 ? "ALL PASS" : std::to_string(failed) + " FAILED") << std::endl;
        return failed == 0 ? 0 : 1;
    } catch (const std::exception& e) {
        std::cerr << "acceptance: " << e.what() << std::endl;
        return 2;
    }
}
