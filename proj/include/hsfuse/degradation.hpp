#pragma once

#include <cstdint>
#include <limits>
#include <utility>

#include "hsfuse/cube.hpp"

namespace hsfuse::sim {

/// Observation-simulation settings. Defaults follow the usual reduced-scale
/// evaluation protocol: 15x15 Gaussian blur with sigma 3.40, decimation by
/// 8 at the block center, 30 dB noise on the hyperspectral observation and
/// 40 dB on the multispectral one.
struct SimConfig {
    std::size_t ratio = 8;
    std::size_t kernel_size = 15;
    double sigma = 3.40;
    double snr_hsi_db = 30.0;  // infinity disables noise
    double snr_msi_db = 40.0;
    std::size_t offset = static_cast<std::size_t>(-1);  // default ratio/2
    std::uint64_t seed = 0;

    std::size_t effective_offset() const {
        return offset == static_cast<std::size_t>(-1) ? ratio / 2 : offset;
    }
};

inline constexpr double kNoNoise = std::numeric_limits<double>::infinity();

/// Isotropic Gaussian sampled at integer offsets from the center and
/// normalized to sum 1.
BlurKernel make_gaussian_kernel(std::size_t size, double sigma);

/// Per-band correlation with the kernel under the shared mirror padding.
HyperCube apply_psf(const HyperCube& x, const BlurKernel& kernel);

/// Keeps pixel (r*i+offset, r*j+offset) of every r x r block.
HyperCube downsample(const HyperCube& x, std::size_t r, std::size_t offset);

/// Mixes bands: out[m] = sum_k R[m,k] * x[k] at every pixel.
HyperCube apply_srf(const HyperCube& x, const SrfMatrix& R);

/// Contiguous band-group averaging; the remainder is spread over the first
/// groups.
SrfMatrix make_box_srf(std::size_t n_in, std::size_t n_out);

/// Adds white Gaussian noise at the requested SNR (power measured over the
/// whole cube), then clamps to [0,1]. Infinite SNR returns the input.
HyperCube add_noise_snr(const HyperCube& x, double snr_db, std::uint64_t seed);

/// Generates the low-resolution hyperspectral and high-resolution
/// multispectral observations from a reference cube.
std::pair<HyperCube, HyperCube> simulate_wald(const HyperCube& ref, const SimConfig& cfg,
                                              const SrfMatrix& srf);

}  // namespace hsfuse::sim
