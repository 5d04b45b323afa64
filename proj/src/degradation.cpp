#include "hsfuse/degradation.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

#include "hsfuse/spatial.hpp"

namespace hsfuse::sim {

BlurKernel make_gaussian_kernel(std::size_t size, double sigma) {
    if (size % 2 == 0) throw std::invalid_argument("make_gaussian_kernel: size must be odd");
    if (!(sigma > 0.0)) throw std::invalid_argument("make_gaussian_kernel: sigma must be > 0");
    BlurKernel k(size);
    const double c = static_cast<double>(size / 2);
    double total = 0.0;
    for (std::size_t i = 0; i < size; ++i) {
        for (std::size_t j = 0; j < size; ++j) {
            const double dy = static_cast<double>(i) - c;
            const double dx = static_cast<double>(j) - c;
            const double w = std::exp(-(dx * dx + dy * dy) / (2.0 * sigma * sigma));
            k.at(i, j) = w;
            total += w;
        }
    }
    for (double& w : k.weights) w /= total;
    return k;
}

HyperCube apply_psf(const HyperCube& x, const BlurKernel& kernel) {
    if (kernel.size > x.height || kernel.size > x.width)
        throw std::invalid_argument("apply_psf: kernel larger than image");
    if (kernel.size % 2 == 0) throw std::invalid_argument("apply_psf: kernel size must be odd");
    HyperCube out(x.bands, x.height, x.width);
    const auto rows = spatial::make_reflect_table(x.height, kernel.size);
    const auto cols = spatial::make_reflect_table(x.width, kernel.size);
    const std::size_t plane = x.height * x.width;
    for (std::size_t b = 0; b < x.bands; ++b)
        spatial::correlate2d_symmetric(x.data.data() + b * plane, x.height, x.width,
                                       kernel.weights.data(), kernel.size,
                                       out.data.data() + b * plane, rows.data(), cols.data());
    return out;
}

HyperCube downsample(const HyperCube& x, std::size_t r, std::size_t offset) {
    if (r < 1) throw std::invalid_argument("downsample: ratio must be >= 1");
    if (offset >= r) throw std::invalid_argument("downsample: offset must satisfy 0 <= offset < r");
    if (x.height % r != 0 || x.width % r != 0)
        throw std::invalid_argument("downsample: dimensions not divisible by ratio");
    HyperCube out(x.bands, x.height / r, x.width / r);
    for (std::size_t b = 0; b < x.bands; ++b)
        for (std::size_t i = 0; i < out.height; ++i)
            for (std::size_t j = 0; j < out.width; ++j)
                out.at(b, i, j) = x.at(b, r * i + offset, r * j + offset);
    return out;
}

HyperCube apply_srf(const HyperCube& x, const SrfMatrix& R) {
    if (R.cols != x.bands)
        throw std::invalid_argument("apply_srf: SRF expects " + std::to_string(R.cols) +
                                    " bands, cube has " + std::to_string(x.bands));
    HyperCube out(R.rows, x.height, x.width);
    const std::size_t pixels = x.pixels();
    // Accumulation order (ascending input band) must match the matrix
    // product used inside the training loss.
    for (std::size_t m = 0; m < R.rows; ++m) {
        for (std::size_t k = 0; k < R.cols; ++k) {
            const double w = R.at(m, k);
            const double* src = x.data.data() + k * pixels;
            double* dst = out.data.data() + m * pixels;
            for (std::size_t p = 0; p < pixels; ++p) dst[p] += w * src[p];
        }
    }
    return out;
}

SrfMatrix make_box_srf(std::size_t n_in, std::size_t n_out) {
    if (n_out < 1 || n_out > n_in)
        throw std::invalid_argument("make_box_srf: need 1 <= n_out <= n_in");
    SrfMatrix R(n_out, n_in);
    const std::size_t base = n_in / n_out;
    const std::size_t remainder = n_in % n_out;
    std::size_t start = 0;
    for (std::size_t m = 0; m < n_out; ++m) {
        const std::size_t group = base + (m < remainder ? 1 : 0);
        for (std::size_t k = 0; k < group; ++k)
            R.at(m, start + k) = 1.0 / static_cast<double>(group);
        start += group;
    }
    return R;
}

HyperCube add_noise_snr(const HyperCube& x, double snr_db, std::uint64_t seed) {
    if (std::isinf(snr_db)) return x;
    if (!(snr_db > 0.0)) throw std::invalid_argument("add_noise_snr: SNR must be positive");
    double power = 0.0;
    for (double v : x.data) power += v * v;
    power /= static_cast<double>(x.size());
    const double noise_sd = std::sqrt(power / std::pow(10.0, snr_db / 10.0));

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, noise_sd);
    HyperCube out = x;
    for (double& v : out.data) v = std::min(std::max(v + normal(rng), 0.0), 1.0);
    return out;
}

std::pair<HyperCube, HyperCube> simulate_wald(const HyperCube& ref, const SimConfig& cfg,
                                              const SrfMatrix& srf) {
    if (ref.height % cfg.ratio != 0 || ref.width % cfg.ratio != 0)
        throw std::invalid_argument("simulate_wald: dimensions not divisible by ratio");
    const BlurKernel kernel = make_gaussian_kernel(cfg.kernel_size, cfg.sigma);
    HyperCube lr = downsample(apply_psf(ref, kernel), cfg.ratio, cfg.effective_offset());
    lr = add_noise_snr(lr, cfg.snr_hsi_db, cfg.seed);
    HyperCube msi = add_noise_snr(apply_srf(ref, srf), cfg.snr_msi_db, cfg.seed + 1);
    return {std::move(lr), std::move(msi)};
}

}  // namespace hsfuse::sim
