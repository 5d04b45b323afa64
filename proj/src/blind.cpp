#include "hsfuse/blind.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "hsfuse/adam.hpp"
#include "hsfuse/autodiff.hpp"
#include "hsfuse/degradation.hpp"

namespace hsfuse::blind {

using ad::DenseArray;
using ad::DiffValue;

std::pair<BlurKernel, SrfMatrix> init_blind(std::size_t kernel_size, std::size_t ms_bands,
                                            std::size_t hs_bands, std::uint64_t /*seed*/) {
    BlurKernel kernel =
        sim::make_gaussian_kernel(kernel_size, static_cast<double>(kernel_size) / 4.0);
    SrfMatrix srf = sim::make_box_srf(hs_bands, ms_bands);
    return {std::move(kernel), std::move(srf)};
}

double blind_loss(const HyperCube& msi, const HyperCube& hsi, const BlurKernel& kernel,
                  const SrfMatrix& srf, std::size_t r, std::size_t offset) {
    HyperCube z_bar = sim::downsample(sim::apply_psf(msi, kernel), r, offset);
    HyperCube y_bar = sim::apply_srf(hsi, srf);
    if (!z_bar.same_shape(y_bar)) throw std::invalid_argument("blind_loss: shapes disagree");
    double loss = 0.0;
    for (std::size_t i = 0; i < z_bar.size(); ++i) {
        const double a = std::min(std::max(z_bar.data[i], 0.0), 1.0);
        const double b = std::min(std::max(y_bar.data[i], 0.0), 1.0);
        loss += std::fabs(a - b);
    }
    return loss;
}

namespace {

void project(DenseArray& kernel, DenseArray& srf, std::size_t rows, std::size_t cols) {
    for (double& w : kernel.data) w = std::min(std::max(w, 0.0), 1.0);
    for (std::size_t m = 0; m < rows; ++m) {
        double sum = 0.0;
        for (std::size_t k = 0; k < cols; ++k) {
            double& w = srf[m * cols + k];
            w = std::max(w, 0.0);
            sum += w;
        }
        if (sum <= 0.0) {
            for (std::size_t k = 0; k < cols; ++k) srf[m * cols + k] = 1.0 / static_cast<double>(cols);
        } else {
            for (std::size_t k = 0; k < cols; ++k) srf[m * cols + k] /= sum;
        }
    }
}

BlurKernel kernel_from(const DenseArray& a, std::size_t k) {
    BlurKernel out(k);
    out.weights = a.data;
    return out;
}

SrfMatrix srf_from(const DenseArray& a, std::size_t rows, std::size_t cols) {
    SrfMatrix out(rows, cols);
    out.weights = a.data;
    return out;
}

}  // namespace

BlindResult estimate_degradation(const HyperCube& msi, const HyperCube& hsi,
                                 const BlindConfig& cfg, const BlindCallback& callback) {
    const std::size_t r = cfg.ratio;
    if (r < 1 || msi.height != r * hsi.height || msi.width != r * hsi.width)
        throw std::invalid_argument("estimate_degradation: observation grids do not match the ratio");
    if (cfg.kernel_size % 2 == 0)
        throw std::invalid_argument("estimate_degradation: kernel size must be odd");
    const std::size_t offset = cfg.effective_offset();

    auto [kernel0, srf0] = init_blind(cfg.kernel_size, msi.bands, hsi.bands, cfg.seed);
    DiffValue kernel_node =
        ad::leaf(DenseArray({cfg.kernel_size, cfg.kernel_size}, kernel0.weights));
    DiffValue srf_node = ad::leaf(DenseArray({msi.bands, hsi.bands}, srf0.weights));

    const DiffValue z_obs = ad::constant(DenseArray({msi.bands, msi.height, msi.width}, msi.data));
    const DiffValue y_obs =
        ad::constant(DenseArray({hsi.bands, hsi.pixels()}, hsi.data));

    ad::AdamState adam;
    const std::vector<DiffValue> trainable = {kernel_node, srf_node};

    BlindResult result;
    result.loss_history.reserve(cfg.iterations);
    double best_loss = std::numeric_limits<double>::infinity();
    auto consider = [&](double loss) {
        if (loss < best_loss) {
            best_loss = loss;
            result.kernel = kernel_from(kernel_node->value, cfg.kernel_size);
            result.srf = srf_from(srf_node->value, msi.bands, hsi.bands);
        }
    };

    for (std::size_t iter = 1; iter <= cfg.iterations; ++iter) {
        const DiffValue z_bar =
            ad::clamp01(ad::subsample(ad::conv2d_perband(z_obs, kernel_node), r, offset));
        const DiffValue z_cols =
            ad::reshape(z_bar, {msi.bands, hsi.pixels()});
        const DiffValue y_bar = ad::clamp01(ad::matmul(srf_node, y_obs));
        const DiffValue loss = ad::l1_loss(z_cols, y_bar);

        consider(loss->value[0]);
        result.loss_history.push_back(loss->value[0]);

        ad::backward(loss);
        ad::adam_step(trainable, adam, cfg.learning_rate);
        project(kernel_node->value, srf_node->value, msi.bands, hsi.bands);
        if (callback)
            callback(iter, loss->value[0], kernel_from(kernel_node->value, cfg.kernel_size),
                     srf_from(srf_node->value, msi.bands, hsi.bands));
    }
    // The loop records the loss before each step; fold in the final iterate.
    consider(blind_loss(msi, hsi, kernel_from(kernel_node->value, cfg.kernel_size),
                        srf_from(srf_node->value, msi.bands, hsi.bands), r, offset));
    return result;
}

}  // namespace hsfuse::blind
