#include "hsfuse/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace hsfuse::ad {

GradCheckResult grad_check(const std::vector<DiffValue>& params,
                           const std::function<DiffValue()>& build, double eps,
                           std::size_t max_coords_per_param, std::uint64_t subset_seed) {
    for (const auto& p : params) p->zero_grad();
    DiffValue loss = build();
    backward(loss);
    const double base = loss->value[0];

    std::vector<std::vector<double>> analytic;
    analytic.reserve(params.size());
    double grad_scale = 0.0;
    for (const auto& p : params) {
        analytic.push_back(p->grad_ref().data);
        for (double g : analytic.back()) grad_scale = std::max(grad_scale, std::fabs(g));
    }
    const double floor = 1e-3 * std::max(1.0, grad_scale);

    std::mt19937_64 rng(subset_seed);
    GradCheckResult result;
    for (std::size_t k = 0; k < params.size(); ++k) {
        DenseArray& value = params[k]->value;
        std::vector<std::size_t> coords(value.size());
        std::iota(coords.begin(), coords.end(), std::size_t{0});
        if (coords.size() > max_coords_per_param) {
            std::shuffle(coords.begin(), coords.end(), rng);
            coords.resize(max_coords_per_param);
        }
        for (std::size_t i : coords) {
            const double saved = value[i];
            const double h = eps * std::max(1.0, std::fabs(saved));
            value[i] = saved + h;
            const double lp = build()->value[0];
            value[i] = saved - h;
            const double lm = build()->value[0];
            value[i] = saved;

            const double slope_p = (lp - base) / h;
            const double slope_m = (base - lm) / h;
            if (std::fabs(slope_p - slope_m) >
                1e-3 * std::max({1.0, std::fabs(slope_p), std::fabs(slope_m)})) {
                ++result.skipped;
                continue;
            }
            const double numeric = (lp - lm) / (2.0 * h);
            const double a = analytic[k][i];
            const double err = std::fabs(a - numeric) / (floor + std::max(std::fabs(a), std::fabs(numeric)));
            result.max_rel_err = std::max(result.max_rel_err, err);
            ++result.checked;
        }
    }
    for (const auto& p : params) p->zero_grad();
    return result;
}

}  // namespace hsfuse::ad
