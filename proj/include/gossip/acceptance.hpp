#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace gossip {

struct CriterionResult {
    int id = 0;
    std::string name;
    bool passed = false;
    std::string detail;
    double seconds = 0.0;
};

struct AcceptanceOptions {
    bool quick = false; // reduced trial counts, same checks and tolerances
    unsigned workers = 0;
    std::uint64_t master_seed = 0x5eed2024;
    std::vector<int> only; // empty = all criteria
    // Called as each criterion finishes.
    std::function<void(const CriterionResult&)> on_result;
};

inline constexpr int acceptance_criterion_count = 11;

std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& options);

std::string format_result_line(const CriterionResult& result);

} // namespace gossip
