#pragma once

#include "randscat/transform.hpp"

namespace randscat {

/// One Fourier-domain point estimate hat(g)(p).
struct PolarSample {
    Vec3 p{0, 0, 0};
    cplx value{0.0, 0.0};
};

struct GriddingDiagnostics {
    int sample_count = 0;
    int distinct_directions = 0;
    bool low_angular_coverage = false;  // fewer than 16 directions
    int filled_nodes = 0;
    int total_nodes = 0;
    double clamp_mass = 0.0;  // |clamped| / |total|, transforms that clamp only
    bool clamp_flagged = false;  // clamp mass above 10%
};

/// Real-field synthesis from scattered Fourier samples:
/// conjugate-symmetrize, grid onto the target's dual frequency lattice by
/// inverse-distance weighting, inverse transform with the (2pi)^{-3/2}
/// convention, and optionally clamp small negative values to zero.
/// Samples must satisfy |p| * h <= pi per axis (inside the lattice Nyquist box).
FieldOnGrid invert_polar_samples(const std::vector<PolarSample>& samples, const GridSpec& target,
                                 bool clamp_nonnegative, GriddingDiagnostics* diag = nullptr);

}  // namespace randscat
