#include "hsfuse/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace hsfuse::metrics {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kDegPerRad = 180.0 / 3.14159265358979323846;

void require_same_shape(const HyperCube& a, const HyperCube& b, const char* op) {
    if (!a.same_shape(b)) throw std::invalid_argument(std::string(op) + ": shape mismatch");
}

}  // namespace

double rmse(const HyperCube& ref, const HyperCube& test) {
    require_same_shape(ref, test, "rmse");
    double acc = 0.0;
    for (std::size_t i = 0; i < ref.size(); ++i) {
        const double d = ref.data[i] - test.data[i];
        acc += d * d;
    }
    return std::sqrt(acc / static_cast<double>(ref.size()));
}

PsnrResult psnr(const HyperCube& ref, const HyperCube& test) {
    require_same_shape(ref, test, "psnr");
    PsnrResult result;
    const std::size_t pixels = ref.pixels();
    double mean_acc = 0.0;
    std::size_t finite_bands = 0;
    for (std::size_t b = 0; b < ref.bands; ++b) {
        double peak = -kInf;
        double mse = 0.0;
        for (std::size_t p = 0; p < pixels; ++p) {
            const double rv = ref.data[b * pixels + p];
            peak = std::max(peak, rv);
            const double d = rv - test.data[b * pixels + p];
            mse += d * d;
        }
        mse /= static_cast<double>(pixels);
        if (mse == 0.0) {
            result.per_band_db.push_back(kInf);
        } else {
            const double db = 10.0 * std::log10(peak * peak / mse);
            result.per_band_db.push_back(db);
            mean_acc += db;
            ++finite_bands;
        }
    }
    result.mean_db = finite_bands == 0 ? kInf : mean_acc / static_cast<double>(finite_bands);
    return result;
}

SamResult sam(const HyperCube& ref, const HyperCube& test) {
    require_same_shape(ref, test, "sam");
    SamResult result;
    const std::size_t pixels = ref.pixels();
    result.sorted_per_pixel_deg.resize(pixels);
    double acc = 0.0;
    for (std::size_t p = 0; p < pixels; ++p) {
        double dot = 0.0, nr2 = 0.0, nt2 = 0.0;
        for (std::size_t b = 0; b < ref.bands; ++b) {
            const double rv = ref.data[b * pixels + p];
            const double tv = test.data[b * pixels + p];
            dot += rv * tv;
            nr2 += rv * rv;
            nt2 += tv * tv;
        }
        double angle = 0.0;
        if (nr2 >= 1e-24 && nt2 >= 1e-24) {  // both norms >= 1e-12
            // Compare squares first so identical spectra land exactly on
            // cos = 1 instead of 1 minus an ulp.
            if (dot >= 0.0 && dot * dot >= nr2 * nt2) {
                angle = 0.0;
            } else if (dot <= 0.0 && dot * dot >= nr2 * nt2) {
                angle = 180.0;
            } else {
                const double c =
                    std::min(std::max(dot / (std::sqrt(nr2) * std::sqrt(nt2)), -1.0), 1.0);
                angle = std::acos(c) * kDegPerRad;
            }
        }
        result.sorted_per_pixel_deg[p] = angle;
        acc += angle;
    }
    result.mean_deg = pixels == 0 ? 0.0 : acc / static_cast<double>(pixels);
    std::sort(result.sorted_per_pixel_deg.begin(), result.sorted_per_pixel_deg.end());
    return result;
}

double ergas(const HyperCube& ref, const HyperCube& test, std::size_t r) {
    require_same_shape(ref, test, "ergas");
    if (r < 1) throw std::invalid_argument("ergas: ratio must be >= 1");
    const std::size_t pixels = ref.pixels();
    double acc = 0.0;
    std::size_t counted = 0;
    for (std::size_t b = 0; b < ref.bands; ++b) {
        double mean = 0.0, mse = 0.0;
        for (std::size_t p = 0; p < pixels; ++p) {
            mean += ref.data[b * pixels + p];
            const double d = ref.data[b * pixels + p] - test.data[b * pixels + p];
            mse += d * d;
        }
        mean /= static_cast<double>(pixels);
        mse /= static_cast<double>(pixels);
        if (std::fabs(mean) < 1e-12) continue;
        acc += mse / (mean * mean);
        ++counted;
    }
    if (counted == 0) return 0.0;
    return 100.0 / static_cast<double>(r) * std::sqrt(acc / static_cast<double>(counted));
}

namespace {

/// Q on one window; returns false when the denominator degenerates.
bool window_q(const HyperCube& ref, const HyperCube& test, std::size_t band, std::size_t y0,
              std::size_t x0, std::size_t h, std::size_t w, double& q_out) {
    const double n = static_cast<double>(h * w);
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < h; ++i)
        for (std::size_t j = 0; j < w; ++j) {
            mx += ref.at(band, y0 + i, x0 + j);
            my += test.at(band, y0 + i, x0 + j);
        }
    mx /= n;
    my /= n;
    double vx = 0.0, vy = 0.0, cov = 0.0;
    for (std::size_t i = 0; i < h; ++i)
        for (std::size_t j = 0; j < w; ++j) {
            const double dx = ref.at(band, y0 + i, x0 + j) - mx;
            const double dy = test.at(band, y0 + i, x0 + j) - my;
            vx += dx * dx;
            vy += dy * dy;
            cov += dx * dy;
        }
    vx /= n - 1.0;
    vy /= n - 1.0;
    cov /= n - 1.0;
    const double denom = (vx + vy) * (mx * mx + my * my);
    if (std::fabs(denom) < 1e-12) return false;
    // Grouping chosen so that identical windows give exactly 1: numerator
    // and denominator then round the same real product 4*var*mean^2.
    q_out = 4.0 * cov * (mx * my) / denom;
    return true;
}

}  // namespace

double uiqi(const HyperCube& ref, const HyperCube& test) {
    require_same_shape(ref, test, "uiqi");
    if (ref.height < 2 || ref.width < 2)
        throw std::invalid_argument("uiqi: image smaller than 2x2");
    constexpr std::size_t kWindow = 32;
    const std::size_t pixels = ref.pixels();
    double band_acc = 0.0;
    for (std::size_t b = 0; b < ref.bands; ++b) {
        double acc = 0.0;
        std::size_t retained = 0;
        for (std::size_t y0 = 0; y0 < ref.height; y0 += kWindow) {
            const std::size_t h = std::min(kWindow, ref.height - y0);
            if (h < 2) continue;
            for (std::size_t x0 = 0; x0 < ref.width; x0 += kWindow) {
                const std::size_t w = std::min(kWindow, ref.width - x0);
                if (w < 2) continue;
                double q;
                if (window_q(ref, test, b, y0, x0, h, w, q)) {
                    acc += q;
                    ++retained;
                }
            }
        }
        if (retained > 0) {
            band_acc += acc / static_cast<double>(retained);
        } else {
            bool equal = true;
            for (std::size_t p = 0; p < pixels && equal; ++p)
                equal = ref.data[b * pixels + p] == test.data[b * pixels + p];
            band_acc += equal ? 1.0 : 0.0;
        }
    }
    return band_acc / static_cast<double>(ref.bands);
}

MetricsReport evaluate(const HyperCube& ref, const HyperCube& test, std::size_t r) {
    MetricsReport report;
    report.rmse = rmse(ref, test);
    PsnrResult p = psnr(ref, test);
    report.psnr_db = p.mean_db;
    report.per_band_psnr = std::move(p.per_band_db);
    SamResult s = sam(ref, test);
    report.sam_deg = s.mean_deg;
    report.sorted_per_pixel_sam = std::move(s.sorted_per_pixel_deg);
    report.ergas = ergas(ref, test, r);
    report.uiqi = uiqi(ref, test);
    return report;
}

}  // namespace hsfuse::metrics
