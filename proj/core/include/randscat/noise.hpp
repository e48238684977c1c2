#pragma once

#include <cstdint>
#include <vector>

#include "randscat/grid.hpp"

namespace randscat {

struct ResolventOperator;  // resolvent.hpp

/// One seeded draw of discrete Gaussian white noise on a grid: i.i.d.
/// Normal(0, h^3) voxel masses. This is the unique grid model for which the
/// discrete Ito isometry Var(sum phi_j W_j) = sum phi_j^2 h^3 is exact for
/// gridded test functions. Regeneration from the same seed is bit-identical.
struct NoiseRealization {
    GridSpec grid;
    std::int64_t seed = 0;
    std::vector<double> W;
};

NoiseRealization draw_noise(const GridSpec& grid, std::int64_t seed);

/// <Bdot, phi> = sum_j phi(x_j) W_j. W already carries the h^{3/2} scaling,
/// so no quadrature factor appears here.
cplx pair(const NoiseRealization& noise, const FieldOnGrid& phi);

/// x -> sum_j Phi_k(x, y_j) sigma(y_j) W_j, i.e. the resolvent applied to the
/// noise measure sigma dB. Internally the quadrature h^3 of the resolvent
/// cancels against W's intrinsic scaling.
FieldOnGrid resolvent_of_noise(const ResolventOperator& R, const std::vector<double>& sigma,
                               const NoiseRealization& noise);

}  // namespace randscat
