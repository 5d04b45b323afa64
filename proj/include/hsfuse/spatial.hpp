#pragma once

#include <cstddef>
#include <vector>

namespace hsfuse::spatial {

// Boundary convention for all spatial blurs: mirror with edge repetition,
// i.e. index -1 maps to 0, -2 to 1, H to H-1, H+1 to H-2. A single
// reflection suffices because kernel size never exceeds the image side.
std::ptrdiff_t reflect_index(std::ptrdiff_t i, std::ptrdiff_t n);

/// Precomputed reflected sample positions for one axis: for output index i
/// and kernel tap u, table[i * k + u] is the source index.
std::vector<std::size_t> make_reflect_table(std::size_t n, std::size_t k);

/// Correlates one H x W plane with a k x k kernel under the mirror
/// convention. dst must not alias src. The tap loop order (row-major over
/// the kernel, accumulated left to right) is part of the contract: the
/// training loss recomputes blurs produced here and compares bitwise.
void correlate2d_symmetric(const double* src, std::size_t height, std::size_t width,
                           const double* kernel, std::size_t ksize, double* dst);

/// Same, with caller-provided reflect tables (from make_reflect_table).
void correlate2d_symmetric(const double* src, std::size_t height, std::size_t width,
                           const double* kernel, std::size_t ksize, double* dst,
                           const std::size_t* row_table, const std::size_t* col_table);

}  // namespace hsfuse::spatial
