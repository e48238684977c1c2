#include "randscat/greens.hpp"

#include <cmath>

namespace randscat {

cplx green_eval(double k, double r) {
    if (!(r > 0.0)) throw std::invalid_argument("green_eval: r must be positive");
    if (!(k >= 0.0) || !std::isfinite(k)) throw std::invalid_argument("green_eval: bad wave number");
    return std::polar(1.0 / (4.0 * M_PI * r), k * r);
}

cplx self_cell_average(double k, double voxel_volume) {
    if (!(voxel_volume > 0.0)) throw std::invalid_argument("self_cell_average: bad voxel volume");
    const double a = std::cbrt(3.0 * voxel_volume / (4.0 * M_PI));
    const double ka = k * a;
    cplx radial;  // integral_0^a r e^{ikr} dr
    if (ka < 1e-4) {
        // series to avoid cancellation at small ka
        const double a2 = a * a;
        radial = cplx(a2 / 2.0 - ka * ka * a2 / 8.0, ka * a2 / 3.0 - ka * ka * ka * a2 / 30.0);
    } else {
        const cplx eika = std::polar(1.0, ka);
        radial = (eika - 1.0) / (k * k) - cplx(0.0, 1.0) * (a / k) * eika;
    }
    return radial / voxel_volume;
}

}  // namespace randscat
