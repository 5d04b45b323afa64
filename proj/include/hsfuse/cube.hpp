#pragma once

#include <cstddef>
#include <vector>

namespace hsfuse {

/// Band-major, row-major grid of reflectance values, nominally in [0,1].
struct HyperCube {
    std::size_t bands = 0;
    std::size_t height = 0;
    std::size_t width = 0;
    std::vector<double> data;

    HyperCube() = default;
    HyperCube(std::size_t b, std::size_t h, std::size_t w)
        : bands(b), height(h), width(w), data(b * h * w, 0.0) {}

    std::size_t size() const { return data.size(); }
    std::size_t pixels() const { return height * width; }

    double& at(std::size_t b, std::size_t y, std::size_t x) {
        return data[(b * height + y) * width + x];
    }
    double at(std::size_t b, std::size_t y, std::size_t x) const {
        return data[(b * height + y) * width + x];
    }

    bool same_shape(const HyperCube& o) const {
        return bands == o.bands && height == o.height && width == o.width;
    }

    /// Affinely maps values onto [0,1]; a constant cube becomes all zeros.
    void scale_to_unit();
};

/// Square nonnegative blur kernel; a compact stand-in for the full
/// shift-invariant blur matrix.
struct BlurKernel {
    std::size_t size = 0;  // odd
    std::vector<double> weights;

    BlurKernel() = default;
    explicit BlurKernel(std::size_t k) : size(k), weights(k * k, 0.0) {}

    double& at(std::size_t i, std::size_t j) { return weights[i * size + j]; }
    double at(std::size_t i, std::size_t j) const { return weights[i * size + j]; }
    double sum() const;
    /// Copy rescaled to sum 1 (unchanged if the sum is zero).
    BlurKernel normalized() const;
};

/// Spectral response matrix mapping many narrow bands to a few broad ones.
/// Rows are nonnegative and sum to 1.
struct SrfMatrix {
    std::size_t rows = 0;  // output (multispectral) bands
    std::size_t cols = 0;  // input (hyperspectral) bands
    std::vector<double> weights;

    SrfMatrix() = default;
    SrfMatrix(std::size_t r, std::size_t c) : rows(r), cols(c), weights(r * c, 0.0) {}

    double& at(std::size_t i, std::size_t j) { return weights[i * cols + j]; }
    double at(std::size_t i, std::size_t j) const { return weights[i * cols + j]; }
};

}  // namespace hsfuse
