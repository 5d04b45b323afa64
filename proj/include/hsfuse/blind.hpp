#pragma once

#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include "hsfuse/cube.hpp"

namespace hsfuse::blind {

struct BlindConfig {
    std::size_t kernel_size = 15;
    std::size_t ratio = 8;
    std::size_t offset = static_cast<std::size_t>(-1);  // default ratio/2
    std::size_t iterations = 5000;
    double learning_rate = 5e-5;
    std::uint64_t seed = 0;

    std::size_t effective_offset() const {
        return offset == static_cast<std::size_t>(-1) ? ratio / 2 : offset;
    }
};

struct BlindResult {
    BlurKernel kernel;  // best feasible iterate, entries in [0,1]
    SrfMatrix srf;      // rows nonnegative, summing to 1
    std::vector<double> loss_history;  // loss at the start of each iteration
};

/// Starting point inside the feasible set: a broad Gaussian (sigma = k/4,
/// sum 1) and the contiguous box SRF.
std::pair<BlurKernel, SrfMatrix> init_blind(std::size_t kernel_size, std::size_t ms_bands,
                                            std::size_t hs_bands, std::uint64_t seed);

/// The estimation objective: sum |clamp01(blur+decimate(msi)) - clamp01(R*hsi)|.
double blind_loss(const HyperCube& msi, const HyperCube& hsi, const BlurKernel& kernel,
                  const SrfMatrix& srf, std::size_t r, std::size_t offset);

/// Called after each optimizer step with that iteration's starting loss and
/// the projected (feasible) parameters.
using BlindCallback =
    std::function<void(std::size_t iter, double loss, const BlurKernel&, const SrfMatrix&)>;

// Estimates the blur kernel and SRF from the two observations alone by
// running Adam on blind_loss, projecting after every step: kernel entries
// clamped to [0,1]; SRF entries clamped to min 0 and rows renormalized to
// sum 1 (an all-zero row resets to uniform). Returns the feasible iterate
// with the lowest recorded loss.
BlindResult estimate_degradation(const HyperCube& msi, const HyperCube& hsi,
                                 const BlindConfig& cfg, const BlindCallback& callback = nullptr);

}  // namespace hsfuse::blind
