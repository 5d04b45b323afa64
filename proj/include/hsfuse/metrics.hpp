#pragma once

#include <vector>

#include "hsfuse/cube.hpp"

namespace hsfuse::metrics {

struct PsnrResult {
    double mean_db = 0.0;              // mean over bands with nonzero error;
                                       // +inf when every band is exact
    std::vector<double> per_band_db;   // exact bands report +inf
};

struct SamResult {
    double mean_deg = 0.0;
    std::vector<double> sorted_per_pixel_deg;  // ascending
};

struct MetricsReport {
    double rmse = 0.0;
    double psnr_db = 0.0;
    double sam_deg = 0.0;
    double ergas = 0.0;
    double uiqi = 0.0;
    std::vector<double> per_band_psnr;
    std::vector<double> sorted_per_pixel_sam;
};

/// Root mean squared error over all elements.
double rmse(const HyperCube& ref, const HyperCube& test);

/// Per band: 10*log10(peak^2 / MSE) with peak the band maximum of ref.
PsnrResult psnr(const HyperCube& ref, const HyperCube& test);

/// Spectral angle per pixel, degrees; near-zero-norm spectra contribute 0.
SamResult sam(const HyperCube& ref, const HyperCube& test);

/// (100/r) * sqrt(mean over bands of (RMSE_k / mean_k)^2); bands whose
/// reference mean is (near) zero are excluded.
double ergas(const HyperCube& ref, const HyperCube& test, std::size_t r);

/// Universal image quality index on non-overlapping 32x32 windows (partial
/// edge windows kept when at least 2x2), averaged over windows then bands.
double uiqi(const HyperCube& ref, const HyperCube& test);

MetricsReport evaluate(const HyperCube& ref, const HyperCube& test, std::size_t r);

}  // namespace hsfuse::metrics
