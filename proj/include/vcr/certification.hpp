#pragma once

// Statistical certification of the algebra's law claims. Every rule builds
// its operands from an actual event history, checks the shape the algebra
// assigns, and compares conditional samples against a fresh reference.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "vcr/event_algebra.hpp"
#include "vcr/recruitment.hpp"
#include "vcr/units.hpp"

namespace vcr {

struct RuleResult {
    std::string id;
    std::string claim;
    std::optional<algebra::LawVerdict> verdict;  // absent for structural rules
    bool shape_ok = false;                       // classify / list tag agrees with the claim
    bool pass = false;
    std::string note;
};

// Rule i draws from Stream(seed, i, Algebra).
std::vector<RuleResult> certify_rewrites(Rate lambda_z, const RecruitmentLaw& law,
                                         const algebra::LawCheckOptions& opt, std::uint64_t seed);

}  // namespace vcr
