#include "randscat/noise.hpp"

#include <cmath>

#include "randscat/resolvent.hpp"
#include "randscat/rng.hpp"

namespace randscat {

NoiseRealization draw_noise(const GridSpec& grid, std::int64_t seed) {
    grid.validate();
    NoiseRealization out;
    out.grid = grid;
    out.seed = seed;
    out.W.resize(grid.num_voxels());
    const double scale = std::sqrt(grid.voxel_volume());
    const auto key = static_cast<std::uint64_t>(seed);
    for (std::size_t i = 0; i < out.W.size(); ++i)
        out.W[i] = scale * rng::normal_at(key, i);
    return out;
}

cplx pair(const NoiseRealization& noise, const FieldOnGrid& phi) {
    phi.check_consistent();
    require_same_grid(noise.grid, phi.grid, "pair");
    cplx acc(0.0, 0.0);
    for (std::size_t i = 0; i < noise.W.size(); ++i) acc += phi[i] * noise.W[i];
    return acc;
}

FieldOnGrid resolvent_of_noise(const ResolventOperator& R, const std::vector<double>& sigma,
                               const NoiseRealization& noise) {
    require_same_grid(R.grid(), noise.grid, "resolvent_of_noise");
    if (sigma.size() != noise.W.size())
        throw std::invalid_argument("resolvent_of_noise: sigma length mismatch");
    // Feed sigma*W/h^3 through the quadrature so the h^3 factor cancels W's
    // intrinsic h^{3/2} scaling: result(x) = sum_j Phi_k(x,y_j) sigma_j W_j.
    FieldOnGrid weighted(noise.grid);
    const double inv_hv = 1.0 / noise.grid.voxel_volume();
    for (std::size_t i = 0; i < weighted.size(); ++i)
        weighted[i] = cplx(sigma[i] * noise.W[i] * inv_hv, 0.0);
    return R.apply(weighted);
}

}  // namespace randscat
