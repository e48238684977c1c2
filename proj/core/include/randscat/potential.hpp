#pragma once

#include "randscat/dataset.hpp"
#include "randscat/freqgrid.hpp"

namespace randscat {

/// Measurement geometry for one Fourier point of the potential: unit vectors
/// with k(xhat - d1) = p exactly and |k(xhat - d2)| growing with k, so the
/// d2 far field carries only a vanishing Fourier tail.
struct DirectionTriple {
    Vec3 p{0, 0, 0};
    double k = 0.0;
    Vec3 xhat{1, 0, 0};
    Vec3 d1{1, 0, 0};
    Vec3 d2{0, 1, 0};

    void validate() const;
};

/// Requires k > |p|/2. The p-orthogonal axis is chosen deterministically
/// (swap the two largest-magnitude components and negate one); p = 0 uses
/// the fixed axes ((1,0,0),(1,0,0),(0,1,0)).
DirectionTriple make_direction_triple(const Vec3& p, double k);

struct PotentialPerK {
    double k = 0.0;
    cplx raw{0.0, 0.0};  // sqrt(2/pi) * (u_inf(xhat,k,d1) - u_inf(xhat,k,d2))
};

struct PotentialHatEstimate {
    cplx estimate{0.0, 0.0};
    bool extrapolated = false;  // false: raw value at the largest k only
    std::vector<PotentialPerK> per_k;
};

/// Single-realization estimate of hat(V)(p) from active far-field differences
/// over k_list, with a two-point 1/k extrapolation from the largest two k.
PotentialHatEstimate potential_hat_estimate(const FarFieldDataset& data, const Vec3& p,
                                            const std::vector<double>& k_list);

/// Same gridding/inversion mechanics as the variance path, without the
/// nonnegativity clamp (V may be signed).
FieldOnGrid reconstruct_potential(const std::vector<PolarSample>& samples, const GridSpec& target,
                                  GriddingDiagnostics* diag = nullptr);

}  // namespace randscat
