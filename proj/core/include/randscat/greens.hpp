#pragma once

#include <stdexcept>

#include "randscat/grid.hpp"

namespace randscat {

/// Wave number k = sqrt(E) > 0.
struct WaveNumber {
    double k = 1.0;

    explicit WaveNumber(double kk) : k(kk) { validate(); }
    void validate() const {
        if (!(k > 0.0) || !std::isfinite(k))
            throw std::invalid_argument("WaveNumber: k must be positive and finite");
    }
};

/// Outgoing Helmholtz fundamental solution e^{ikr}/(4*pi*r). k = 0 is the
/// Laplace limit 1/(4*pi*r).
cplx green_eval(double k, double r);

/// Average of the fundamental solution over a ball of the given volume,
/// centered on the singularity. Used as the finite self term of the
/// discretized convolution kernel. Closed form of the radial integral
///   integral_0^a r e^{ikr} dr = (e^{ika} - 1)/k^2 - i a e^{ika}/k
/// over the equal-volume ball radius a, divided by the voxel volume.
cplx self_cell_average(double k, double voxel_volume);

}  // namespace randscat
