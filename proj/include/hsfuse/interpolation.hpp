#pragma once

#include "hsfuse/cube.hpp"

namespace hsfuse::interp {

// Both methods use half-pixel-center alignment: output pixel (i,j) samples
// the source at ((i+0.5)/r - 0.5, (j+0.5)/r - 0.5), clamped to the valid
// range. This keeps the upsampled grid aligned with centered decimation.

HyperCube upsample_bilinear(const HyperCube& x, std::size_t r);
HyperCube upsample_nearest(const HyperCube& x, std::size_t r);

}  // namespace hsfuse::interp
