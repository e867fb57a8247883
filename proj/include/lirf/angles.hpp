#pragma once

#include <cmath>

namespace lirf {

// All angles are degrees. Latent angles are unbounded reals; observations of
// symmetric parts report the representative in [0, 90).

// Canonicalize to [0, 360).
inline double canon360(double deg) {
    double r = std::fmod(deg, 360.0);
    if (r < 0.0) r += 360.0;
    return r;
}

// Representative of the 4-fold symmetry class, in [0, 90). fmod is exact in
// IEEE arithmetic, so aliased latents that differ by an exactly representable
// multiple of 90 map to bit-identical observations.
inline double alias90(double deg) {
    double r = std::fmod(deg, 90.0);
    if (r < 0.0) r += 90.0;
    return r;
}

// Signed wrap to (-180, 180], used by the door-lock success test.
inline double wrap180(double deg) {
    double r = canon360(deg);
    if (r > 180.0) r -= 360.0;
    return r;
}

}  // namespace lirf
