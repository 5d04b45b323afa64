#include <doctest.h>

#include <cmath>
#include <random>

#include "hsfuse/degradation.hpp"
#include "hsfuse/gradcheck.hpp"
#include "hsfuse/interpolation.hpp"
#include "hsfuse/net.hpp"

using namespace hsfuse;
using ad::DenseArray;
using ad::DiffValue;

namespace {

HyperCube smooth_cube(std::size_t b, std::size_t h, std::size_t w, std::uint64_t seed) {
    HyperCube cube(b, h, w);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(0.0, 1.0);
    for (double& v : cube.data) v = dist(rng);
    return sim::apply_psf(cube, sim::make_gaussian_kernel(5, 1.5));
}

DenseArray slice(const HyperCube& cube, std::size_t y0, std::size_t x0, std::size_t h,
                 std::size_t w) {
    DenseArray out({cube.bands, h, w});
    for (std::size_t b = 0; b < cube.bands; ++b)
        for (std::size_t i = 0; i < h; ++i)
            for (std::size_t j = 0; j < w; ++j)
                out[(b * h + i) * w + j] = cube.at(b, y0 + i, x0 + j);
    return out;
}

net::FusionParams zero_params(std::size_t J, std::size_t K, std::size_t n_hs, std::size_t n_ms) {
    net::FusionConfig cfg;
    cfg.rank = J;
    cfg.stages = K;
    net::FusionParams p = net::init_params(cfg, n_hs, n_ms, 0);
    for (const auto& node : p.all()) node->value.fill(0.0);
    return p;
}

}  // namespace

TEST_CASE("lr_schedule follows the delayed linear decay") {
    CHECK(net::lr_schedule(1, 5e-3) == 5e-3);
    CHECK(net::lr_schedule(1000, 5e-3) == 5e-3);
    CHECK(net::lr_schedule(10000, 5e-3) == 0.0);
    CHECK(net::lr_schedule(5500, 1.0) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK_THROWS_AS((void)net::lr_schedule(0, 1.0), std::invalid_argument);
}

TEST_CASE("init_params is seeded and bounded") {
    net::FusionConfig cfg;
    cfg.rank = 6;
    cfg.stages = 3;
    const net::FusionParams a = net::init_params(cfg, 12, 4, 42);
    const net::FusionParams b = net::init_params(cfg, 12, 4, 42);
    const auto va = a.all(), vb = b.all();
    REQUIRE(va.size() == vb.size());
    for (std::size_t i = 0; i < va.size(); ++i) CHECK(va[i]->value.data == vb[i]->value.data);

    for (double v : a.decoder->value.data) {
        CHECK(v >= 0.0);
        CHECK(v < 1.0);
    }
    const net::FusionParams c = net::init_params(cfg, 12, 4, 43);
    CHECK(c.decoder->value.data != a.decoder->value.data);
}

TEST_CASE("parameter inventory matches the closed-form count") {
    // J=80, K=3, 103 hyperspectral bands, 4 multispectral bands
    net::FusionConfig cfg;
    cfg.rank = 80;
    cfg.stages = 3;
    const net::FusionParams p = net::init_params(cfg, 103, 4, 1);

    const std::size_t J = 80;
    const std::size_t z_branch = J * 4 + J;
    const std::size_t y_branch = (J * 103 + J) + (J * J + J);
    const std::size_t s_modules = 2 * (J * J + J);       // stages 2..3
    const std::size_t mix1 = J * (2 * J) + J;            // stage 1
    const std::size_t mix_rest = 2 * (J * (3 * J) + J);  // stages 2..3
    const std::size_t decoder = 103 * J;
    const std::size_t expected = z_branch + y_branch + s_modules + mix1 + mix_rest + decoder;
    CHECK(expected == 87840);
    CHECK(p.parameter_count() == expected);
}

TEST_CASE("structural inventory: one z branch, two-layer y branch, K-1 carries, K mixers") {
    net::FusionConfig cfg;
    cfg.rank = 5;
    cfg.stages = 4;
    const net::FusionParams p = net::init_params(cfg, 9, 3, 7);
    CHECK(p.s_weights.size() == 3);  // stages 2..K
    CHECK(p.mix_weights.size() == 4);
    CHECK(p.mix_weights[0]->value.dim(1) == 10);  // 2J
    for (std::size_t k = 1; k < 4; ++k) CHECK(p.mix_weights[k]->value.dim(1) == 15);  // 3J
    CHECK(p.y_weight1->value.dim(1) == 9);
    CHECK(p.y_weight2->value.dim(1) == 5);
    CHECK(p.z_weight->value.dim(1) == 3);

    net::FusionConfig single = cfg;
    single.stages = 1;
    const net::FusionParams q = net::init_params(single, 9, 3, 7);
    CHECK(q.s_weights.empty());  // no carried-state modules when K=1
    CHECK(q.mix_weights.size() == 1);
}

TEST_CASE("encode output lies in [0,1] and zero parameters give zero latents") {
    net::FusionConfig cfg;
    cfg.rank = 4;
    cfg.stages = 2;
    const net::FusionParams p = net::init_params(cfg, 8, 3, 3);

    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> dist(0.0, 1.0);
    DenseArray z({3, 10}), y({8, 10});
    for (double& v : z.data) v = dist(rng);
    for (double& v : y.data) v = dist(rng);

    const DiffValue s = net::encode(ad::constant(z), ad::constant(y), p, 0.01);
    CHECK(s->value.shape == std::vector<std::size_t>{4, 10});
    for (double v : s->value.data) {
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
    }

    const net::FusionParams zeros = zero_params(4, 2, 8, 3);
    const DiffValue s0 = net::encode(ad::constant(z), ad::constant(y), zeros, 0.01);
    for (double v : s0->value.data) CHECK(v == 0.0);

    // single pixel: 1-D in, 1-D out
    DenseArray z1({3}, {0.1, 0.5, 0.9});
    DenseArray y1({8});
    y1.fill(0.3);
    const DiffValue s1 = net::encode(ad::constant(z1), ad::constant(y1), p, 0.01);
    CHECK(s1->value.shape == std::vector<std::size_t>{4});
}

TEST_CASE("encoder is pixel-local: perturbing one column leaves others bitwise unchanged") {
    net::FusionConfig cfg;
    cfg.rank = 5;
    cfg.stages = 3;
    const net::FusionParams p = net::init_params(cfg, 10, 4, 9);

    std::mt19937_64 rng(10);
    std::uniform_real_distribution<double> dist(0.0, 1.0);
    DenseArray z({4, 6}), y({10, 6});
    for (double& v : z.data) v = dist(rng);
    for (double& v : y.data) v = dist(rng);

    const DiffValue base = net::encode(ad::constant(z), ad::constant(y), p, 0.01);
    DenseArray z2 = z, y2 = y;
    const std::size_t perturbed = 3;
    for (std::size_t b = 0; b < 4; ++b) z2[b * 6 + perturbed] += 0.2;
    for (std::size_t b = 0; b < 10; ++b) y2[b * 6 + perturbed] -= 0.1;
    const DiffValue moved = net::encode(ad::constant(z2), ad::constant(y2), p, 0.01);

    for (std::size_t j = 0; j < 5; ++j)
        for (std::size_t c = 0; c < 6; ++c) {
            if (c == perturbed) continue;
            CHECK(base->value[j * 6 + c] == moved->value[j * 6 + c]);
        }
}

TEST_CASE("decode clamps and matches the matrix-vector oracle") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> dist(0.0, 1.0);

    DenseArray eye({3, 3}, {1, 0, 0, 0, 1, 0, 0, 0, 1});
    DenseArray s({3}, {0.2, 0.6, 1.0});
    const DiffValue out = net::decode(ad::constant(s), ad::constant(eye));
    CHECK(out->value.shape == std::vector<std::size_t>{3});
    for (std::size_t i = 0; i < 3; ++i) CHECK(out->value[i] == s[i]);

    DenseArray zero({3});
    const DiffValue out0 = net::decode(ad::constant(zero), ad::constant(eye));
    for (double v : out0->value.data) CHECK(v == 0.0);

    DenseArray a({6, 4});
    for (double& v : a.data) v = dist(rng);
    DenseArray sv({4});
    for (double& v : sv.data) v = dist(rng);
    const DiffValue mixed = net::decode(ad::constant(sv), ad::constant(a));
    for (std::size_t i = 0; i < 6; ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j < 4; ++j) acc += a[i * 4 + j] * sv[j];
        acc = std::min(std::max(acc, 0.0), 1.0);
        CHECK(std::fabs(mixed->value[i] - acc) < 1e-12);
    }
}

TEST_CASE("make_patch_plan axis rules") {
    const net::PatchPlan p100 = net::make_patch_plan(100, 100, 40, 24, 4);
    CHECK(p100.row_origins == std::vector<std::size_t>{0, 24, 48, 60});

    const net::PatchPlan p512 = net::make_patch_plan(512, 512, 40, 24, 8);
    std::vector<std::size_t> expected;
    for (std::size_t o = 0; o + 40 <= 512; o += 24) expected.push_back(o);
    expected.push_back(472);
    CHECK(p512.row_origins == expected);
    CHECK(p512.row_origins.back() == 472);

    const net::PatchPlan whole = net::make_patch_plan(64, 64, 64, 24, 8);
    CHECK(whole.row_origins == std::vector<std::size_t>{0});

    CHECK_THROWS_AS((void)net::make_patch_plan(32, 32, 40, 24, 4), std::invalid_argument);
}

TEST_CASE("patch plan covers every pixel with ratio-aligned origins") {
    const std::size_t h = 104, w = 136, patch = 24, stride = 16, r = 8;
    const net::PatchPlan plan = net::make_patch_plan(h, w, patch, stride, r);
    std::vector<char> covered(h * w, 0);
    for (const auto& [oy, ox] : plan.origins) {
        CHECK(oy % r == 0);
        CHECK(ox % r == 0);
        CHECK(oy + patch <= h);
        CHECK(ox + patch <= w);
        for (std::size_t i = 0; i < patch; ++i)
            for (std::size_t j = 0; j < patch; ++j) covered[(oy + i) * w + ox + j] = 1;
    }
    for (char c : covered) CHECK(c == 1);
}

TEST_CASE("patch_loss is zero when the reconstruction is bypassed with the reference") {
    const std::size_t bands = 5, side = 16, r = 4;
    const HyperCube ref = smooth_cube(bands, side, side, 20);
    const BlurKernel kernel = sim::make_gaussian_kernel(5, 1.4);
    const SrfMatrix srf = sim::make_box_srf(bands, 2);

    sim::SimConfig sc;
    sc.ratio = r;
    sc.kernel_size = 5;
    sc.sigma = 1.4;
    sc.snr_hsi_db = sim::kNoNoise;
    sc.snr_msi_db = sim::kNoNoise;
    const auto [lr_hsi, hr_msi] = sim::simulate_wald(ref, sc, srf);

    const DenseArray z_patch = slice(hr_msi, 0, 0, side, side);
    const DenseArray y_patch = slice(lr_hsi, 0, 0, side / r, side / r);
    const DiffValue x_ref =
        ad::constant(DenseArray({bands, side * side}, ref.data));
    const DiffValue loss = net::consistency_loss(x_ref, z_patch, y_patch, kernel, srf, r,
                                                 sc.effective_offset());
    CHECK(loss->value[0] == 0.0);
}

TEST_CASE("patch_loss is nonnegative and validates its inputs") {
    const std::size_t bands = 4, side = 16, r = 4;
    const HyperCube ref = smooth_cube(bands, side, side, 21);
    const BlurKernel kernel = sim::make_gaussian_kernel(3, 1.0);
    const SrfMatrix srf = sim::make_box_srf(bands, 2);
    sim::SimConfig sc;
    sc.ratio = r;
    sc.kernel_size = 3;
    sc.sigma = 1.0;
    sc.snr_hsi_db = sim::kNoNoise;
    sc.snr_msi_db = sim::kNoNoise;
    const auto [lr_hsi, hr_msi] = sim::simulate_wald(ref, sc, srf);
    const HyperCube y_up = interp::upsample_bilinear(lr_hsi, r);

    net::FusionConfig cfg;
    cfg.rank = 3;
    cfg.stages = 2;
    const net::FusionParams params = net::init_params(cfg, bands, 2, 5);

    const DiffValue loss =
        net::patch_loss(slice(hr_msi, 0, 0, side, side), slice(y_up, 0, 0, side, side),
                        slice(lr_hsi, 0, 0, side / r, side / r), params, kernel, srf, r, 2, 0.01);
    CHECK(loss->value[0] >= 0.0);

    // a patch of 2 LR pixels per side would lose its whole Y-term
    CHECK_THROWS_AS((void)net::patch_loss(slice(hr_msi, 0, 0, 8, 8), slice(y_up, 0, 0, 8, 8),
                                          slice(lr_hsi, 0, 0, 2, 2), params, kernel, srf, r, 2,
                                          0.01),
                    std::invalid_argument);
}

TEST_CASE("patch_loss gradients agree with finite differences on a parameter subset") {
    const std::size_t bands = 8, side = 16, r = 4;
    const HyperCube ref = smooth_cube(bands, side, side, 22);
    const BlurKernel kernel = sim::make_gaussian_kernel(5, 1.2);
    const SrfMatrix srf = sim::make_box_srf(bands, 3);
    sim::SimConfig sc;
    sc.ratio = r;
    sc.kernel_size = 5;
    sc.sigma = 1.2;
    sc.snr_hsi_db = sim::kNoNoise;
    sc.snr_msi_db = sim::kNoNoise;
    const auto [lr_hsi, hr_msi] = sim::simulate_wald(ref, sc, srf);
    const HyperCube y_up = interp::upsample_bilinear(lr_hsi, r);

    net::FusionConfig cfg;
    cfg.rank = 6;
    cfg.stages = 2;
    const net::FusionParams params = net::init_params(cfg, bands, 3, 6);

    const DenseArray z_patch = slice(hr_msi, 0, 0, side, side);
    const DenseArray yup_patch = slice(y_up, 0, 0, side, side);
    const DenseArray y_patch = slice(lr_hsi, 0, 0, side / r, side / r);
    auto build = [&] {
        return net::patch_loss(z_patch, yup_patch, y_patch, params, kernel, srf, r, 2, 0.01);
    };
    // roughly 20 coordinates spread over the parameter list
    const ad::GradCheckResult res = ad::grad_check(params.all(), build, 1e-5, 2, 17);
    CHECK(res.checked >= 20);
    CHECK(res.max_rel_err < 1e-4);
}

TEST_CASE("train produces a clamped fused cube deterministically") {
    const std::size_t bands = 6, side = 16, r = 4;
    const HyperCube ref = smooth_cube(bands, side, side, 23);
    const BlurKernel kernel = sim::make_gaussian_kernel(3, 0.8);
    const SrfMatrix srf = sim::make_box_srf(bands, 2);
    sim::SimConfig sc;
    sc.ratio = r;
    sc.kernel_size = 3;
    sc.sigma = 0.8;
    sc.snr_hsi_db = sim::kNoNoise;
    sc.snr_msi_db = sim::kNoNoise;
    const auto [lr_hsi, hr_msi] = sim::simulate_wald(ref, sc, srf);

    net::FusionConfig cfg;
    cfg.rank = 4;
    cfg.stages = 2;
    cfg.iterations = 12;
    cfg.batch = 2;
    cfg.patch = 12;
    cfg.stride = 8;
    cfg.learning_rate = 5e-3;
    cfg.seed = 3;

    const net::TrainResult a = net::train(lr_hsi, hr_msi, kernel, srf, cfg);
    CHECK(a.fused.bands == bands);
    CHECK(a.fused.height == side);
    CHECK(a.fused.width == side);
    CHECK(a.loss_history.size() == 12);
    for (double v : a.fused.data) {
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
    }
    for (double l : a.loss_history) CHECK(l >= 0.0);

    const net::TrainResult b = net::train(lr_hsi, hr_msi, kernel, srf, cfg);
    CHECK(a.fused.data == b.fused.data);  // bitwise
    CHECK(a.loss_history == b.loss_history);
}
