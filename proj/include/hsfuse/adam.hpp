#pragma once

#include "hsfuse/autodiff.hpp"

namespace hsfuse::ad {

/// Adam moment state for a fixed parameter list.
struct AdamState {
    std::size_t step_count = 0;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    std::vector<DenseArray> m;  // first moments, one per parameter
    std::vector<DenseArray> v;  // second moments
};

/// One bias-corrected Adam update in place; gradients are zeroed afterwards.
/// The moment arrays are created on the first call.
void adam_step(const std::vector<DiffValue>& params, AdamState& state, double learning_rate);

}  // namespace hsfuse::ad
