#include "hsfuse/interpolation.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace hsfuse::interp {

namespace {

double source_coord(std::size_t out_index, std::size_t r, std::size_t src_dim) {
    const double u = (static_cast<double>(out_index) + 0.5) / static_cast<double>(r) - 0.5;
    return std::min(std::max(u, 0.0), static_cast<double>(src_dim - 1));
}

}  // namespace

HyperCube upsample_bilinear(const HyperCube& x, std::size_t r) {
    if (r < 1) throw std::invalid_argument("upsample_bilinear: ratio must be >= 1");
    if (r == 1) return x;
    HyperCube out(x.bands, x.height * r, x.width * r);
    for (std::size_t i = 0; i < out.height; ++i) {
        const double u = source_coord(i, r, x.height);
        const std::size_t i0 = static_cast<std::size_t>(u);
        const std::size_t i1 = std::min(i0 + 1, x.height - 1);
        const double fy = u - static_cast<double>(i0);
        for (std::size_t j = 0; j < out.width; ++j) {
            const double v = source_coord(j, r, x.width);
            const std::size_t j0 = static_cast<std::size_t>(v);
            const std::size_t j1 = std::min(j0 + 1, x.width - 1);
            const double fx = v - static_cast<double>(j0);
            for (std::size_t b = 0; b < x.bands; ++b) {
                const double top = (1.0 - fx) * x.at(b, i0, j0) + fx * x.at(b, i0, j1);
                const double bottom = (1.0 - fx) * x.at(b, i1, j0) + fx * x.at(b, i1, j1);
                out.at(b, i, j) = (1.0 - fy) * top + fy * bottom;
            }
        }
    }
    return out;
}

HyperCube upsample_nearest(const HyperCube& x, std::size_t r) {
    if (r < 1) throw std::invalid_argument("upsample_nearest: ratio must be >= 1");
    if (r == 1) return x;
    HyperCube out(x.bands, x.height * r, x.width * r);
    for (std::size_t i = 0; i < out.height; ++i) {
        const std::size_t si = static_cast<std::size_t>(std::lround(source_coord(i, r, x.height)));
        for (std::size_t j = 0; j < out.width; ++j) {
            const std::size_t sj =
                static_cast<std::size_t>(std::lround(source_coord(j, r, x.width)));
            for (std::size_t b = 0; b < x.bands; ++b) out.at(b, i, j) = x.at(b, si, sj);
        }
    }
    return out;
}

}  // namespace hsfuse::interp
