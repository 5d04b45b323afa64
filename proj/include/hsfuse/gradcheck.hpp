#pragma once

#include <cstdint>
#include <functional>

#include "hsfuse/autodiff.hpp"

namespace hsfuse::ad {

struct GradCheckResult {
    double max_rel_err = 0.0;
    std::size_t checked = 0;
    std::size_t skipped = 0;  // coordinates sitting on a kink
};

// Compares analytic gradients against central finite differences.
//
// `build` must construct the loss graph from the current parameter values
// deterministically; it is re-evaluated after each coordinate perturbation.
// Every loss here is piecewise linear in any single coordinate (the graph
// is built from linear maps, leaky_relu, clamp01 and l1), so away from
// kinks the central difference is exact up to rounding. A coordinate whose
// two one-sided slopes disagree is within eps of a kink and is skipped.
//
// The error is |analytic - numeric| / (floor + max(|analytic|, |numeric|))
// with floor = 1e-3 * max(1, largest gradient magnitude), which keeps
// rounding noise on near-zero coordinates from dominating the report.
GradCheckResult grad_check(const std::vector<DiffValue>& params,
                           const std::function<DiffValue()>& build, double eps,
                           std::size_t max_coords_per_param = static_cast<std::size_t>(-1),
                           std::uint64_t subset_seed = 0);

}  // namespace hsfuse::ad
