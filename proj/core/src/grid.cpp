#include "randscat/grid.hpp"

#include <cmath>

namespace randscat {

void GridSpec::validate() const {
    for (int a = 0; a < 3; ++a) {
        if (!(extent[a] > 0.0) || !std::isfinite(extent[a]))
            throw std::invalid_argument("GridSpec: extent must be positive and finite");
        if (n[a] < 4) throw std::invalid_argument("GridSpec: need at least 4 voxels per axis");
        if (!std::isfinite(origin[a])) throw std::invalid_argument("GridSpec: origin must be finite");
        if (origin[a] > 0.0 || origin[a] + extent[a] < 0.0)
            throw std::invalid_argument("GridSpec: box must contain the origin");
    }
    if (!(voxel_volume() > 0.0)) throw std::invalid_argument("GridSpec: voxel volume must be positive");
}

FieldOnGrid operator+(const FieldOnGrid& a, const FieldOnGrid& b) {
    require_same_grid(a.grid, b.grid, "field add");
    FieldOnGrid out(a.grid, (a.kind == FieldKind::Real && b.kind == FieldKind::Real)
                                ? FieldKind::Real
                                : FieldKind::Complex);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] + b[i];
    return out;
}

FieldOnGrid operator-(const FieldOnGrid& a, const FieldOnGrid& b) {
    require_same_grid(a.grid, b.grid, "field sub");
    FieldOnGrid out(a.grid, (a.kind == FieldKind::Real && b.kind == FieldKind::Real)
                                ? FieldKind::Real
                                : FieldKind::Complex);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] - b[i];
    return out;
}

FieldOnGrid operator*(cplx s, const FieldOnGrid& a) {
    FieldOnGrid out(a.grid, s.imag() == 0.0 && a.kind == FieldKind::Real ? FieldKind::Real
                                                                         : FieldKind::Complex);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = s * a[i];
    return out;
}

void add_in_place(FieldOnGrid& a, const FieldOnGrid& b) {
    require_same_grid(a.grid, b.grid, "field add");
    for (std::size_t i = 0; i < a.size(); ++i) a[i] += b[i];
}

FieldOnGrid multiply(const std::vector<double>& real_factor, const FieldOnGrid& a) {
    if (real_factor.size() != a.size())
        throw std::invalid_argument("multiply: factor length does not match field");
    FieldOnGrid out(a.grid, a.kind);
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = real_factor[i] * a[i];
    return out;
}

double l2_norm(const FieldOnGrid& f) {
    double acc = 0.0;
    for (const cplx& v : f.values) acc += std::norm(v);
    return std::sqrt(acc * f.grid.voxel_volume());
}

double l2_norm_on_support(const FieldOnGrid& f, const std::vector<std::uint8_t>& mask) {
    if (mask.size() != f.size())
        throw std::invalid_argument("l2_norm_on_support: mask length does not match field");
    double acc = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i)
        if (mask[i]) acc += std::norm(f[i]);
    return std::sqrt(acc * f.grid.voxel_volume());
}

FieldOnGrid discrete_laplacian(const FieldOnGrid& f) {
    const GridSpec& g = f.grid;
    const Vec3 h = g.h();
    const double wx = 1.0 / (h[0] * h[0]);
    const double wy = 1.0 / (h[1] * h[1]);
    const double wz = 1.0 / (h[2] * h[2]);
    FieldOnGrid out(g, f.kind);
    for (int iz = 1; iz + 1 < g.n[2]; ++iz)
        for (int iy = 1; iy + 1 < g.n[1]; ++iy)
            for (int ix = 1; ix + 1 < g.n[0]; ++ix) {
                const std::size_t c = g.index(ix, iy, iz);
                out[c] = wx * (f[g.index(ix - 1, iy, iz)] - 2.0 * f[c] + f[g.index(ix + 1, iy, iz)]) +
                         wy * (f[g.index(ix, iy - 1, iz)] - 2.0 * f[c] + f[g.index(ix, iy + 1, iz)]) +
                         wz * (f[g.index(ix, iy, iz - 1)] - 2.0 * f[c] + f[g.index(ix, iy, iz + 1)]);
            }
    return out;
}

}  // namespace randscat
