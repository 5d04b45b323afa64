#include "hsfuse/selfcheck.hpp"

#include <random>

#include "hsfuse/degradation.hpp"
#include "hsfuse/gradcheck.hpp"
#include "hsfuse/interpolation.hpp"
#include "hsfuse/net.hpp"

namespace hsfuse {

namespace {

using ad::DenseArray;
using ad::DiffValue;

DenseArray random_array(std::vector<std::size_t> shape, double lo, double hi,
                        std::mt19937_64& rng) {
    DenseArray a(std::move(shape));
    std::uniform_real_distribution<double> dist(lo, hi);
    for (double& v : a.data) v = dist(rng);
    return a;
}

SelfCheckCase run_case(const std::string& name, const std::vector<DiffValue>& params,
                       const std::function<DiffValue()>& build, double eps,
                       std::size_t max_coords = static_cast<std::size_t>(-1)) {
    const ad::GradCheckResult r = ad::grad_check(params, build, eps, max_coords, 7);
    return {name, r.max_rel_err, r.checked, r.skipped, r.max_rel_err < kGradCheckTolerance};
}

}  // namespace

std::vector<SelfCheckCase> run_gradcheck_suite(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<SelfCheckCase> cases;
    const double eps = 1e-5;

    {
        DiffValue x = ad::leaf(random_array({7}, -1.0, 1.0, rng));
        DiffValue w1 = ad::leaf(random_array({5, 7}, -0.5, 0.5, rng));
        DiffValue b1 = ad::leaf(random_array({5}, -0.2, 0.2, rng));
        DiffValue w2 = ad::leaf(random_array({3, 5}, -0.5, 0.5, rng));
        DiffValue b2 = ad::leaf(random_array({3}, -0.2, 0.2, rng));
        cases.push_back(run_case("fully_connected", {x, w1, b1, w2, b2}, [=] {
            return ad::sum_all(ad::fully_connected(
                ad::fully_connected(x, w1, b1), w2, b2));
        }, eps));
    }
    {
        DiffValue x = ad::leaf(random_array({4, 6}, -1.0, 1.0, rng));
        DiffValue w = ad::leaf(random_array({3, 4}, -0.7, 0.7, rng));
        DiffValue b = ad::leaf(random_array({3}, -0.2, 0.2, rng));
        const DiffValue target = ad::constant(random_array({3, 6}, -0.5, 0.5, rng));
        cases.push_back(run_case("leaky_relu", {x, w, b}, [=] {
            return ad::l1_loss(ad::leaky_relu(ad::fully_connected(x, w, b), 0.01), target);
        }, eps));
    }
    {
        DiffValue x = ad::leaf(random_array({24}, -0.5, 1.5, rng));
        cases.push_back(run_case("clamp01", {x}, [=] {
            return ad::sum_all(ad::mul(ad::clamp01(x), ad::clamp01(x)));
        }, eps));
    }
    {
        DiffValue a = ad::leaf(random_array({5}, -1.0, 1.0, rng));
        DiffValue b = ad::leaf(random_array({3}, -1.0, 1.0, rng));
        DiffValue w = ad::leaf(random_array({4, 8}, -0.5, 0.5, rng));
        DiffValue bias = ad::leaf(random_array({4}, -0.2, 0.2, rng));
        const DiffValue target = ad::constant(random_array({4}, -0.5, 0.5, rng));
        cases.push_back(run_case("concat", {a, b, w, bias}, [=] {
            return ad::l1_loss(ad::fully_connected(ad::concat({a, b}), w, bias), target);
        }, eps));
    }
    {
        DiffValue x = ad::leaf(random_array({2, 6, 6}, 0.0, 1.0, rng));
        DiffValue k = ad::leaf(random_array({3, 3}, 0.0, 0.3, rng));
        const DiffValue target = ad::constant(random_array({2, 6, 6}, 0.0, 1.0, rng));
        cases.push_back(run_case("conv2d_perband", {x, k}, [=] {
            return ad::l1_loss(ad::conv2d_perband(x, k), target);
        }, eps));
    }
    {
        DiffValue x = ad::leaf(random_array({1, 6, 6}, -1.0, 1.0, rng));
        cases.push_back(run_case("subsample", {x}, [=] {
            return ad::sum_all(ad::subsample(x, 2, 1));
        }, eps));
    }
    {
        DiffValue a = ad::leaf(random_array({4, 4}, -1.0, 1.0, rng));
        const DiffValue b = ad::constant(random_array({4, 4}, -1.0, 1.0, rng));
        cases.push_back(run_case("l1_loss", {a}, [=] { return ad::l1_loss(a, b); }, eps));
    }
    {
        DiffValue a = ad::leaf(random_array({6}, -1.0, 1.0, rng));
        DiffValue b = ad::leaf(random_array({6}, -1.0, 1.0, rng));
        cases.push_back(run_case("mul", {a, b}, [=] { return ad::sum_all(ad::mul(a, b)); }, eps));
    }
    {
        // Full training objective on an 8-band 16x16 toy: simulate noiseless
        // observations from a smooth cube, then differentiate one patch loss
        // with respect to every parameter.
        const std::size_t bands = 8, side = 16, ratio = 4;
        HyperCube ref(bands, side, side);
        std::uniform_real_distribution<double> dist(0.0, 1.0);
        HyperCube noise(bands, side, side);
        for (double& v : noise.data) v = dist(rng);
        ref = sim::apply_psf(noise, sim::make_gaussian_kernel(7, 2.0));

        sim::SimConfig sc;
        sc.ratio = ratio;
        sc.kernel_size = 5;
        sc.sigma = 1.2;
        sc.snr_hsi_db = sim::kNoNoise;
        sc.snr_msi_db = sim::kNoNoise;
        const SrfMatrix srf = sim::make_box_srf(bands, 3);
        const auto [lr_hsi, hr_msi] = sim::simulate_wald(ref, sc, srf);
        const HyperCube y_up = interp::upsample_bilinear(lr_hsi, ratio);
        const BlurKernel kernel = sim::make_gaussian_kernel(sc.kernel_size, sc.sigma);

        net::FusionConfig fc;
        fc.rank = 6;
        fc.stages = 2;
        const net::FusionParams params = net::init_params(fc, bands, srf.rows, seed + 1);

        DenseArray z_patch({srf.rows, side, side}, hr_msi.data);
        DenseArray yup_patch({bands, side, side}, y_up.data);
        DenseArray y_patch({bands, side / ratio, side / ratio}, lr_hsi.data);
        cases.push_back(run_case("full_fusion_loss", params.all(), [=] {
            return net::patch_loss(z_patch, yup_patch, y_patch, params, kernel, srf, ratio,
                                   sc.ratio / 2, fc.leaky_slope);
        }, eps));
    }
    return cases;
}

bool all_pass(const std::vector<SelfCheckCase>& cases) {
    for (const auto& c : cases)
        if (!c.pass) return false;
    return true;
}

}  // namespace hsfuse
