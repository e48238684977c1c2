#include "randscat/transform.hpp"

#include <cmath>

#include "randscat/fft.hpp"

namespace randscat {

namespace {
constexpr double k_two_pi = 2.0 * M_PI;
const double k_fourier_norm = std::pow(k_two_pi, -1.5);
}  // namespace

cplx fourier_transform_hat(const FieldOnGrid& field, const Vec3& p) {
    if (!all_finite(p)) throw std::invalid_argument("fourier_transform_hat: non-finite frequency");
    field.check_consistent();
    const GridSpec& g = field.grid;
    const Vec3 h = g.h();
    const double hv = g.voxel_volume();

    // Separable phases keep the n^3 sum at O(n^3) with three O(n) tables.
    std::vector<cplx> ex(g.n[0]), ey(g.n[1]), ez(g.n[2]);
    for (int i = 0; i < g.n[0]; ++i)
        ex[i] = std::polar(1.0, -(g.origin[0] + (i + 0.5) * h[0]) * p[0]);
    for (int i = 0; i < g.n[1]; ++i)
        ey[i] = std::polar(1.0, -(g.origin[1] + (i + 0.5) * h[1]) * p[1]);
    for (int i = 0; i < g.n[2]; ++i)
        ez[i] = std::polar(1.0, -(g.origin[2] + (i + 0.5) * h[2]) * p[2]);

    cplx acc(0.0, 0.0);
    std::size_t idx = 0;
    for (int iz = 0; iz < g.n[2]; ++iz)
        for (int iy = 0; iy < g.n[1]; ++iy) {
            const cplx eyz = ey[iy] * ez[iz];
            cplx row(0.0, 0.0);
            for (int ix = 0; ix < g.n[0]; ++ix, ++idx) row += ex[ix] * field[idx];
            acc += eyz * row;
        }
    return k_fourier_norm * hv * acc;
}

int dual_signed_index(int i, int n) { return i < (n + 1) / 2 ? i : i - n; }

double dual_spacing(const GridSpec& g, int axis) { return k_two_pi / g.extent[axis]; }

Vec3 dual_frequency(const GridSpec& g, int mx, int my, int mz) {
    return {mx * dual_spacing(g, 0), my * dual_spacing(g, 1), mz * dual_spacing(g, 2)};
}

std::vector<cplx> fourier_hat_on_dual_grid(const FieldOnGrid& field) {
    field.check_consistent();
    const GridSpec& g = field.grid;
    const Vec3 h = g.h();
    std::vector<cplx> data = field.values;
    fft::c2c(data, g.n, /*forward=*/true);

    // DFT gives sum_j exp(-2*pi*i*j.m/n) phi_j; attach the midpoint phase
    // exp(-i*(origin + h/2).p_m) and the quadrature factor h^3.
    const double hv = g.voxel_volume();
    for (int iz = 0; iz < g.n[2]; ++iz)
        for (int iy = 0; iy < g.n[1]; ++iy)
            for (int ix = 0; ix < g.n[0]; ++ix) {
                const Vec3 p = dual_frequency(g, dual_signed_index(ix, g.n[0]),
                                              dual_signed_index(iy, g.n[1]),
                                              dual_signed_index(iz, g.n[2]));
                const double phase = -((g.origin[0] + 0.5 * h[0]) * p[0] +
                                       (g.origin[1] + 0.5 * h[1]) * p[1] +
                                       (g.origin[2] + 0.5 * h[2]) * p[2]);
                data[g.index(ix, iy, iz)] *= std::polar(k_fourier_norm * hv, phase);
            }
    return data;
}

FieldOnGrid inverse_fourier_from_dual_grid(const GridSpec& g, const std::vector<cplx>& hat_values) {
    if (hat_values.size() != g.num_voxels())
        throw std::invalid_argument("inverse_fourier_from_dual_grid: node count mismatch");
    const Vec3 h = g.h();
    const double dp3 = dual_spacing(g, 0) * dual_spacing(g, 1) * dual_spacing(g, 2);

    std::vector<cplx> data(hat_values);
    for (int iz = 0; iz < g.n[2]; ++iz)
        for (int iy = 0; iy < g.n[1]; ++iy)
            for (int ix = 0; ix < g.n[0]; ++ix) {
                const Vec3 p = dual_frequency(g, dual_signed_index(ix, g.n[0]),
                                              dual_signed_index(iy, g.n[1]),
                                              dual_signed_index(iz, g.n[2]));
                const double phase = (g.origin[0] + 0.5 * h[0]) * p[0] +
                                     (g.origin[1] + 0.5 * h[1]) * p[1] +
                                     (g.origin[2] + 0.5 * h[2]) * p[2];
                data[g.index(ix, iy, iz)] *= std::polar(k_fourier_norm * dp3, phase);
            }
    fft::c2c(data, g.n, /*forward=*/false);

    FieldOnGrid out(g);
    out.values = std::move(data);
    return out;
}

double weighted_norm(const FieldOnGrid& field, const WeightedNormSpec& spec) {
    spec.validate();
    field.check_consistent();
    const GridSpec& g = field.grid;
    double acc = 0.0;
    for (std::size_t i = 0; i < field.size(); ++i) {
        const Vec3 x = g.center(i);
        const double w = std::pow(1.0 + dot(x, x), spec.s);  // <x>^{2s}
        acc += w * std::norm(field[i]);
    }
    return std::sqrt(acc * g.voxel_volume());
}

}  // namespace randscat
