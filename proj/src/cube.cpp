#include "hsfuse/cube.hpp"

#include <algorithm>
#include <cassert>

#include "hsfuse/spatial.hpp"

namespace hsfuse {

void HyperCube::scale_to_unit() {
    if (data.empty()) return;
    const auto [lo, hi] = std::minmax_element(data.begin(), data.end());
    const double range = *hi - *lo;
    if (range <= 0.0) {
        std::fill(data.begin(), data.end(), 0.0);
        return;
    }
    for (double& v : data) v = (v - *lo) / range;
}

double BlurKernel::sum() const {
    double s = 0.0;
    for (double w : weights) s += w;
    return s;
}

BlurKernel BlurKernel::normalized() const {
    BlurKernel out = *this;
    const double s = sum();
    if (s != 0.0)
        for (double& w : out.weights) w /= s;
    return out;
}

}  // namespace hsfuse

namespace hsfuse::spatial {

std::ptrdiff_t reflect_index(std::ptrdiff_t i, std::ptrdiff_t n) {
    if (i < 0) i = -i - 1;
    if (i >= n) i = 2 * n - i - 1;
    assert(i >= 0 && i < n);
    return i;
}

std::vector<std::size_t> make_reflect_table(std::size_t n, std::size_t k) {
    const std::ptrdiff_t c = static_cast<std::ptrdiff_t>(k) / 2;
    std::vector<std::size_t> table(n * k);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t u = 0; u < k; ++u)
            table[i * k + u] = static_cast<std::size_t>(reflect_index(
                static_cast<std::ptrdiff_t>(i) + static_cast<std::ptrdiff_t>(u) - c,
                static_cast<std::ptrdiff_t>(n)));
    return table;
}

void correlate2d_symmetric(const double* src, std::size_t height, std::size_t width,
                           const double* kernel, std::size_t ksize, double* dst) {
    const auto rows = make_reflect_table(height, ksize);
    const auto cols = make_reflect_table(width, ksize);
    correlate2d_symmetric(src, height, width, kernel, ksize, dst, rows.data(), cols.data());
}

void correlate2d_symmetric(const double* src, std::size_t height, std::size_t width,
                           const double* kernel, std::size_t ksize, double* dst,
                           const std::size_t* row_table, const std::size_t* col_table) {
    for (std::size_t i = 0; i < height; ++i) {
        for (std::size_t j = 0; j < width; ++j) {
            double acc = 0.0;
            for (std::size_t u = 0; u < ksize; ++u) {
                const double* srow = src + row_table[i * ksize + u] * width;
                const double* krow = kernel + u * ksize;
                const std::size_t* ctab = col_table + j * ksize;
                for (std::size_t v = 0; v < ksize; ++v) acc += krow[v] * srow[ctab[v]];
            }
            dst[i * width + j] = acc;
        }
    }
}

}  // namespace hsfuse::spatial
