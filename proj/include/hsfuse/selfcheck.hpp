#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace hsfuse {

struct SelfCheckCase {
    std::string name;
    double max_rel_err = 0.0;
    std::size_t checked = 0;
    std::size_t skipped = 0;
    bool pass = false;
};

inline constexpr double kGradCheckTolerance = 1e-4;

/// Finite-difference verification of every differentiable op plus the full
/// training objective on an 8-band 16x16 toy instance.
std::vector<SelfCheckCase> run_gradcheck_suite(std::uint64_t seed);

bool all_pass(const std::vector<SelfCheckCase>& cases);

}  // namespace hsfuse
