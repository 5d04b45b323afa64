#include "hsfuse/net.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "hsfuse/interpolation.hpp"

namespace hsfuse::net {

using ad::DenseArray;
using ad::DiffValue;

std::vector<DiffValue> FusionParams::all() const {
    std::vector<DiffValue> list = {z_weight, z_bias, y_weight1, y_bias1, y_weight2, y_bias2};
    for (std::size_t k = 0; k < s_weights.size(); ++k) {
        list.push_back(s_weights[k]);
        list.push_back(s_biases[k]);
    }
    for (std::size_t k = 0; k < mix_weights.size(); ++k) {
        list.push_back(mix_weights[k]);
        list.push_back(mix_biases[k]);
    }
    list.push_back(decoder);
    return list;
}

std::size_t FusionParams::parameter_count() const {
    std::size_t n = 0;
    for (const auto& p : all()) n += p->value.size();
    return n;
}

FusionParams FusionParams::frozen() const {
    FusionParams f;
    f.rank = rank;
    f.stages = stages;
    f.hs_bands = hs_bands;
    f.ms_bands = ms_bands;
    f.z_weight = ad::constant(z_weight->value);
    f.z_bias = ad::constant(z_bias->value);
    f.y_weight1 = ad::constant(y_weight1->value);
    f.y_bias1 = ad::constant(y_bias1->value);
    f.y_weight2 = ad::constant(y_weight2->value);
    f.y_bias2 = ad::constant(y_bias2->value);
    for (const auto& w : s_weights) f.s_weights.push_back(ad::constant(w->value));
    for (const auto& b : s_biases) f.s_biases.push_back(ad::constant(b->value));
    for (const auto& w : mix_weights) f.mix_weights.push_back(ad::constant(w->value));
    for (const auto& b : mix_biases) f.mix_biases.push_back(ad::constant(b->value));
    f.decoder = ad::constant(decoder->value);
    return f;
}

double lr_schedule(std::size_t iter, double base, std::size_t delay, double span) {
    if (iter < 1) throw std::invalid_argument("lr_schedule: iterations are 1-based");
    const double over = std::max(0.0, static_cast<double>(iter) - static_cast<double>(delay));
    return base * std::max(0.0, 1.0 - over / span);
}

namespace {

DenseArray uniform_matrix(std::size_t rows, std::size_t cols, double lo, double hi,
                          std::mt19937_64& rng) {
    DenseArray m({rows, cols});
    std::uniform_real_distribution<double> dist(lo, hi);
    for (double& v : m.data) v = dist(rng);
    return m;
}

DiffValue fan_in_layer(std::size_t n_out, std::size_t n_in, std::mt19937_64& rng) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(n_in));
    return ad::leaf(uniform_matrix(n_out, n_in, -bound, bound, rng));
}

}  // namespace

FusionParams init_params(const FusionConfig& cfg, std::size_t hs_bands, std::size_t ms_bands,
                         std::uint64_t seed) {
    const std::size_t J = cfg.rank, K = cfg.stages;
    if (J < 1 || J >= hs_bands)
        throw std::invalid_argument("init_params: rank must satisfy 1 <= J < hyperspectral bands");
    if (K < 1) throw std::invalid_argument("init_params: need at least one stage");

    std::mt19937_64 rng(seed);
    FusionParams p;
    p.rank = J;
    p.stages = K;
    p.hs_bands = hs_bands;
    p.ms_bands = ms_bands;

    p.z_weight = fan_in_layer(J, ms_bands, rng);
    p.z_bias = ad::leaf(DenseArray({J}));
    p.y_weight1 = fan_in_layer(J, hs_bands, rng);
    p.y_bias1 = ad::leaf(DenseArray({J}));
    p.y_weight2 = fan_in_layer(J, J, rng);
    p.y_bias2 = ad::leaf(DenseArray({J}));
    for (std::size_t k = 2; k <= K; ++k) {
        p.s_weights.push_back(fan_in_layer(J, J, rng));
        p.s_biases.push_back(ad::leaf(DenseArray({J})));
    }
    for (std::size_t k = 1; k <= K; ++k) {
        const std::size_t width = k == 1 ? 2 * J : 3 * J;
        p.mix_weights.push_back(fan_in_layer(J, width, rng));
        p.mix_biases.push_back(ad::leaf(DenseArray({J})));
    }
    p.decoder = ad::leaf(uniform_matrix(hs_bands, J, 0.0, 1.0, rng));
    return p;
}

DiffValue encode(const DiffValue& z, const DiffValue& y_up, const FusionParams& params,
                 double leaky_slope) {
    const auto act = [leaky_slope](const DiffValue& v) { return ad::leaky_relu(v, leaky_slope); };
    // The two observation features are built once and fed to every stage.
    const DiffValue u_z = act(ad::fully_connected(z, params.z_weight, params.z_bias));
    const DiffValue u_y = act(ad::fully_connected(
        act(ad::fully_connected(y_up, params.y_weight1, params.y_bias1)), params.y_weight2,
        params.y_bias2));

    DiffValue s = act(ad::fully_connected(ad::concat({u_z, u_y}), params.mix_weights[0],
                                          params.mix_biases[0]));
    for (std::size_t k = 2; k <= params.stages; ++k) {
        const DiffValue carried =
            act(ad::fully_connected(s, params.s_weights[k - 2], params.s_biases[k - 2]));
        s = act(ad::fully_connected(ad::concat({carried, u_z, u_y}), params.mix_weights[k - 1],
                                    params.mix_biases[k - 1]));
    }
    return ad::clamp01(s);
}

DiffValue decode(const DiffValue& s, const DiffValue& A) {
    const bool vector_input = s->value.rank() == 1;
    DiffValue cols = vector_input ? ad::reshape(s, {s->value.dim(0), 1}) : s;
    DiffValue out = ad::clamp01(ad::matmul(ad::clamp01(A), ad::clamp01(cols)));
    if (vector_input) out = ad::reshape(out, {out->value.dim(0)});
    return out;
}

namespace {

std::vector<std::size_t> plan_axis(std::size_t dim, std::size_t patch, std::size_t stride) {
    std::vector<std::size_t> origins;
    for (std::size_t o = 0; o + patch <= dim; o += stride) origins.push_back(o);
    if (origins.back() + patch < dim) origins.push_back(dim - patch);
    return origins;
}

}  // namespace

PatchPlan make_patch_plan(std::size_t height, std::size_t width, std::size_t patch,
                          std::size_t stride, std::size_t r) {
    if (patch > height || patch > width)
        throw std::invalid_argument("make_patch_plan: patch exceeds image size");
    if (patch == 0 || stride == 0) throw std::invalid_argument("make_patch_plan: zero patch/stride");
    if (patch % r != 0 || stride % r != 0)
        throw std::invalid_argument("make_patch_plan: patch and stride must be multiples of the ratio");
    if (height % r != 0 || width % r != 0)
        throw std::invalid_argument("make_patch_plan: image dims must be multiples of the ratio");
    PatchPlan plan;
    plan.patch = patch;
    plan.row_origins = plan_axis(height, patch, stride);
    plan.col_origins = plan_axis(width, patch, stride);
    for (std::size_t oy : plan.row_origins)
        for (std::size_t ox : plan.col_origins) plan.origins.emplace_back(oy, ox);
    return plan;
}

namespace {

DenseArray slice_cube(const HyperCube& cube, std::size_t y0, std::size_t x0, std::size_t h,
                      std::size_t w) {
    DenseArray out({cube.bands, h, w});
    for (std::size_t b = 0; b < cube.bands; ++b)
        for (std::size_t i = 0; i < h; ++i)
            for (std::size_t j = 0; j < w; ++j)
                out[(b * h + i) * w + j] = cube.at(b, y0 + i, x0 + j);
    return out;
}

DenseArray srf_matrix_array(const SrfMatrix& R) {
    return DenseArray({R.rows, R.cols}, R.weights);
}

DenseArray kernel_array(const BlurKernel& k) {
    return DenseArray({k.size, k.size}, k.weights);
}

}  // namespace

DiffValue consistency_loss(const DiffValue& x_hat, const DenseArray& z_patch,
                           const DenseArray& y_patch_lr, const BlurKernel& kernel,
                           const SrfMatrix& srf, std::size_t r, std::size_t offset) {
    if (z_patch.rank() != 3 || y_patch_lr.rank() != 3)
        throw std::invalid_argument("consistency_loss: expected [B,H,W] observations");
    const std::size_t ph = z_patch.dim(1), pw = z_patch.dim(2);
    if (ph % r != 0 || pw % r != 0)
        throw std::invalid_argument("consistency_loss: patch dims must be multiples of the ratio");
    if (ph / r < 3 || pw / r < 3)
        throw std::invalid_argument(
            "consistency_loss: patch needs at least 3 LR pixels per side after the boundary discard");
    const std::size_t n_ms = z_patch.dim(0), n_hs = y_patch_lr.dim(0);
    if (y_patch_lr.dim(1) != ph / r || y_patch_lr.dim(2) != pw / r)
        throw std::invalid_argument("consistency_loss: LR patch does not match the HR patch");
    if (srf.rows != n_ms || srf.cols != n_hs)
        throw std::invalid_argument("consistency_loss: band counts disagree");
    if (x_hat->value.rank() != 2 || x_hat->value.dim(0) != n_hs ||
        x_hat->value.dim(1) != ph * pw)
        throw std::invalid_argument("consistency_loss: reconstruction shape disagrees");

    // Multispectral consistency over every patch pixel.
    const DiffValue z_cols = ad::constant(DenseArray({n_ms, ph * pw}, z_patch.data));
    const DiffValue srf_node = ad::constant(srf_matrix_array(srf));
    const DiffValue z_hat = ad::clamp01(ad::matmul(srf_node, x_hat));
    const DiffValue loss_z = ad::l1_loss(z_hat, z_cols);

    // Hyperspectral consistency after blur + decimation, minus the ring the
    // patch-local padding can influence.
    const DiffValue x_cube = ad::reshape(x_hat, {n_hs, ph, pw});
    const DiffValue kernel_node = ad::constant(kernel_array(kernel));
    const DiffValue y_hat =
        ad::clamp01(ad::subsample(ad::conv2d_perband(x_cube, kernel_node), r, offset));
    const DiffValue y_hat_inner = ad::crop2d(y_hat, 1, 1, 1, 1);
    const std::size_t lh = ph / r, lw = pw / r;
    DenseArray y_obs_inner({n_hs, lh - 2, lw - 2});
    for (std::size_t b = 0; b < n_hs; ++b)
        for (std::size_t i = 0; i < lh - 2; ++i)
            for (std::size_t j = 0; j < lw - 2; ++j)
                y_obs_inner[(b * (lh - 2) + i) * (lw - 2) + j] =
                    y_patch_lr[(b * lh + 1 + i) * lw + 1 + j];
    const DiffValue loss_y = ad::l1_loss(y_hat_inner, ad::constant(std::move(y_obs_inner)));

    return ad::add(loss_z, loss_y);
}

DiffValue patch_loss(const DenseArray& z_patch, const DenseArray& yup_patch,
                     const DenseArray& y_patch_lr, const FusionParams& params,
                     const BlurKernel& kernel, const SrfMatrix& srf, std::size_t r,
                     std::size_t offset, double leaky_slope) {
    if (z_patch.rank() != 3 || yup_patch.rank() != 3)
        throw std::invalid_argument("patch_loss: expected [B,H,W] inputs");
    const std::size_t ph = z_patch.dim(1), pw = z_patch.dim(2);
    if (yup_patch.dim(1) != ph || yup_patch.dim(2) != pw)
        throw std::invalid_argument("patch_loss: patch shapes disagree");
    const std::size_t pixels = ph * pw;
    const std::size_t n_hs = yup_patch.dim(0), n_ms = z_patch.dim(0);
    const DiffValue z_cols = ad::constant(DenseArray({n_ms, pixels}, z_patch.data));
    const DiffValue yup_cols = ad::constant(DenseArray({n_hs, pixels}, yup_patch.data));
    const DiffValue latent = encode(z_cols, yup_cols, params, leaky_slope);
    const DiffValue x_hat = decode(latent, params.decoder);  // [N_B, pixels]
    return consistency_loss(x_hat, z_patch, y_patch_lr, kernel, srf, r, offset);
}

HyperCube infer(const HyperCube& hr_msi, const HyperCube& y_up, const FusionParams& params,
                double leaky_slope) {
    if (hr_msi.height != y_up.height || hr_msi.width != y_up.width ||
        hr_msi.bands != params.ms_bands || y_up.bands != params.hs_bands)
        throw std::invalid_argument("infer: observation shapes disagree with the parameters");

    const FusionParams frozen = params.frozen();
    const std::size_t pixels = hr_msi.pixels();
    const std::size_t chunk = 4096;  // output does not depend on the chunking
    HyperCube fused(params.hs_bands, hr_msi.height, hr_msi.width);

    for (std::size_t start = 0; start < pixels; start += chunk) {
        const std::size_t cols = std::min(chunk, pixels - start);
        DenseArray z({hr_msi.bands, cols});
        DenseArray y({y_up.bands, cols});
        for (std::size_t b = 0; b < hr_msi.bands; ++b)
            for (std::size_t c = 0; c < cols; ++c)
                z[b * cols + c] = hr_msi.data[b * pixels + start + c];
        for (std::size_t b = 0; b < y_up.bands; ++b)
            for (std::size_t c = 0; c < cols; ++c)
                y[b * cols + c] = y_up.data[b * pixels + start + c];

        const DiffValue latent =
            encode(ad::constant(std::move(z)), ad::constant(std::move(y)), frozen, leaky_slope);
        const DiffValue x_hat = decode(latent, frozen.decoder);
        for (std::size_t b = 0; b < params.hs_bands; ++b)
            for (std::size_t c = 0; c < cols; ++c)
                fused.data[b * pixels + start + c] = x_hat->value[b * cols + c];
    }
    return fused;
}

TrainResult train(const HyperCube& lr_hsi, const HyperCube& hr_msi, const BlurKernel& kernel,
                  const SrfMatrix& srf, const FusionConfig& cfg) {
    if (lr_hsi.height == 0 || lr_hsi.width == 0 || hr_msi.height % lr_hsi.height != 0)
        throw std::invalid_argument("train: observation grids are not nested");
    const std::size_t r = hr_msi.height / lr_hsi.height;
    if (hr_msi.height != r * lr_hsi.height || hr_msi.width != r * lr_hsi.width)
        throw std::invalid_argument("train: resolution ratio differs between axes");
    if (srf.rows != hr_msi.bands || srf.cols != lr_hsi.bands)
        throw std::invalid_argument("train: SRF shape disagrees with the observations");
    if (cfg.patch % r != 0 || cfg.stride % r != 0)
        throw std::invalid_argument("train: patch and stride must be multiples of the ratio");
    if (cfg.patch + 1 <= kernel.size)
        throw std::invalid_argument("train: patch must exceed the blur kernel support");
    if (cfg.batch < 1 || cfg.iterations < 1)
        throw std::invalid_argument("train: batch and iterations must be positive");

    const std::size_t offset = cfg.effective_offset(r);
    const HyperCube y_up = interp::upsample_bilinear(lr_hsi, r);
    const PatchPlan plan =
        make_patch_plan(hr_msi.height, hr_msi.width, cfg.patch, cfg.stride, r);

    TrainResult result;
    result.params = init_params(cfg, lr_hsi.bands, hr_msi.bands, cfg.seed);
    const std::vector<DiffValue> trainable = result.params.all();

    ad::AdamState adam;
    std::mt19937_64 sampler(cfg.seed + 1);
    std::uniform_int_distribution<std::size_t> pick(0, plan.origins.size() - 1);

    result.loss_history.reserve(cfg.iterations);
    result.rate_history.reserve(cfg.iterations);
    for (std::size_t iter = 1; iter <= cfg.iterations; ++iter) {
        const double rate = lr_schedule(iter, cfg.learning_rate, cfg.decay_delay, cfg.decay_span);
        DiffValue total;
        for (std::size_t b = 0; b < cfg.batch; ++b) {
            const auto [oy, ox] = plan.origins[pick(sampler)];
            DenseArray z_patch = slice_cube(hr_msi, oy, ox, cfg.patch, cfg.patch);
            DenseArray yup_patch = slice_cube(y_up, oy, ox, cfg.patch, cfg.patch);
            DenseArray y_patch =
                slice_cube(lr_hsi, oy / r, ox / r, cfg.patch / r, cfg.patch / r);
            DiffValue loss = patch_loss(z_patch, yup_patch, y_patch, result.params, kernel, srf,
                                        r, offset, cfg.leaky_slope);
            total = total ? ad::add(total, loss) : loss;
        }
        total = ad::scale(total, 1.0 / static_cast<double>(cfg.batch));
        ad::backward(total);
        ad::adam_step(trainable, adam, rate);
        result.loss_history.push_back(total->value[0]);
        result.rate_history.push_back(rate);
    }

    result.fused = infer(hr_msi, y_up, result.params, cfg.leaky_slope);
    return result;
}

}  // namespace hsfuse::net
