#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "hsfuse/adam.hpp"
#include "hsfuse/autodiff.hpp"
#include "hsfuse/cube.hpp"

namespace hsfuse::net {

/// Training settings for the fusion autoencoder.
struct FusionConfig {
    std::size_t rank = 80;    // latent width J
    std::size_t stages = 3;   // unrolled iterations K
    double leaky_slope = 0.01;
    std::size_t iterations = 10000;
    std::size_t batch = 25;
    std::size_t patch = 40;   // HR pixels per patch side
    std::size_t stride = 24;  // HR pixels between patch origins
    double learning_rate = 5e-3;
    std::size_t decay_delay = 1000;  // iterations at the base rate
    double decay_span = 9000;        // iterations to reach rate 0 afterwards
    std::size_t offset = static_cast<std::size_t>(-1);  // decimation phase; default ratio/2
    std::uint64_t seed = 0;

    std::size_t effective_offset(std::size_t ratio) const {
        return offset == static_cast<std::size_t>(-1) ? ratio / 2 : offset;
    }
};

// Trainable parameters. The encoder turns the two per-pixel observations
// into a latent vector through K stages; the decoder is a single spectral
// matrix used through clamp01. Stage 1 mixes (u_z, u_y), width 2J; stages
// 2..K mix (f_s(s), u_z, u_y), width 3J.
struct FusionParams {
    std::size_t rank = 0;
    std::size_t stages = 0;
    std::size_t hs_bands = 0;  // N_B
    std::size_t ms_bands = 0;  // N_b

    ad::DiffValue z_weight, z_bias;    // observation branch, N_b -> J
    ad::DiffValue y_weight1, y_bias1;  // upsampled branch, N_B -> J
    ad::DiffValue y_weight2, y_bias2;  // J -> J
    std::vector<ad::DiffValue> s_weights, s_biases;      // stages 2..K, J -> J
    std::vector<ad::DiffValue> mix_weights, mix_biases;  // stages 1..K
    ad::DiffValue decoder;  // A, N_B x J

    std::vector<ad::DiffValue> all() const;
    std::size_t parameter_count() const;
    /// Deep copy whose nodes do not require gradients (inference).
    FusionParams frozen() const;
};

/// Covering set of patch origins on the HR grid.
struct PatchPlan {
    std::size_t patch = 0;
    std::vector<std::size_t> row_origins;
    std::vector<std::size_t> col_origins;
    std::vector<std::pair<std::size_t, std::size_t>> origins;  // row-major product
};

/// Learning rate at 1-based iteration `iter`: the base rate for the first
/// `delay` iterations, then a linear decay reaching zero after `span` more.
double lr_schedule(std::size_t iter, double base, std::size_t delay = 1000, double span = 9000.0);

/// Weights uniform on [-1/sqrt(fan_in), 1/sqrt(fan_in)], biases zero, the
/// decoder matrix uniform on [0,1). Deterministic given the seed.
FusionParams init_params(const FusionConfig& cfg, std::size_t hs_bands, std::size_t ms_bands,
                         std::uint64_t seed);

/// Latent vectors for one pixel (1-D inputs) or a column batch of pixels
/// (2-D inputs, one pixel per column). Output is clamped to [0,1].
ad::DiffValue encode(const ad::DiffValue& z, const ad::DiffValue& y_up, const FusionParams& params,
                     double leaky_slope);

/// clamp01(clamp01(A) * clamp01(s)); accepts a vector or a column batch.
ad::DiffValue decode(const ad::DiffValue& s, const ad::DiffValue& A);

/// Origins at 0, stride, 2*stride, ... while origin+patch fits; when pixels
/// remain uncovered the end-aligned origin dim-patch is appended.
PatchPlan make_patch_plan(std::size_t height, std::size_t width, std::size_t patch,
                          std::size_t stride, std::size_t r);

// Observation-consistency objective for one patch given its reconstruction
// x_hat ([N_B, p*p] columns in raster order). The multispectral term
// compares clamp01(R*X) against z_patch over all patch pixels; the
// hyperspectral term blurs and decimates X and discards a one-LR-pixel
// ring, which removes everything the patch-local padding can have touched.
ad::DiffValue consistency_loss(const ad::DiffValue& x_hat, const ad::DenseArray& z_patch,
                               const ad::DenseArray& y_patch_lr, const BlurKernel& kernel,
                               const SrfMatrix& srf, std::size_t r, std::size_t offset);

// One patch of the training objective: encode/decode every pixel, then the
// consistency loss. z_patch and yup_patch live on the HR grid ([N_b,p,p]
// and [N_B,p,p]); y_patch_lr is the matching LR slice ([N_B,p/r,p/r]).
ad::DiffValue patch_loss(const ad::DenseArray& z_patch, const ad::DenseArray& yup_patch,
                         const ad::DenseArray& y_patch_lr, const FusionParams& params,
                         const BlurKernel& kernel, const SrfMatrix& srf, std::size_t r,
                         std::size_t offset, double leaky_slope);

struct TrainResult {
    HyperCube fused;
    FusionParams params;
    std::vector<double> loss_history;  // one entry per iteration
    std::vector<double> rate_history;
};

/// Trains on randomly sampled patches, then runs the trained
/// encoder/decoder over every pixel to produce the fused cube.
TrainResult train(const HyperCube& lr_hsi, const HyperCube& hr_msi, const BlurKernel& kernel,
                  const SrfMatrix& srf, const FusionConfig& cfg);

/// Full-image inference with frozen parameters (no graph).
HyperCube infer(const HyperCube& hr_msi, const HyperCube& y_up, const FusionParams& params,
                double leaky_slope);

}  // namespace hsfuse::net
