#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace aniso::tools {

struct AcceptanceOptions {
    std::uint64_t seed = 1;
    int threads = 1;
    /// Criterion ids ("1".."10") or names; empty runs everything.
    std::vector<std::string> only;
};

struct CriterionOutcome {
    int id = 0;
    std::string name;
    bool pass = false;
    std::string detail;
    double seconds = 0.0;
    /// file name -> CSV content; byte-compared by the determinism criterion.
    std::map<std::string, std::string> csv;
};

struct CriterionInfo {
    int id;
    const char* name;
};

const std::vector<CriterionInfo>& acceptance_criteria();

/// Runs the selected criteria in id order. Throws std::invalid_argument for an
/// unknown --only entry.
std::vector<CriterionOutcome> run_acceptance(const AcceptanceOptions& options);

/// "PASS  3 ludwig-limit  <detail>  (12.3 s)"
std::string format_outcome(const CriterionOutcome& outcome);

}  // namespace aniso::tools
