#pragma once

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "randscat/vec3.hpp"

namespace randscat {

using cplx = std::complex<double>;

/// Regular voxel grid over an axis-aligned box. Fields are sampled at voxel
/// midpoints, ordered x-fastest: index = ix + n[0]*(iy + n[1]*iz).
struct GridSpec {
    Vec3 origin{0, 0, 0};   // corner of the box
    Vec3 extent{1, 1, 1};   // box edge lengths
    Idx3 n{4, 4, 4};        // voxels per axis

    Vec3 h() const { return {extent[0] / n[0], extent[1] / n[1], extent[2] / n[2]}; }
    double voxel_volume() const {
        const Vec3 s = h();
        return s[0] * s[1] * s[2];
    }
    std::size_t num_voxels() const {
        return std::size_t(n[0]) * std::size_t(n[1]) * std::size_t(n[2]);
    }
    std::size_t index(int ix, int iy, int iz) const {
        return std::size_t(ix) + std::size_t(n[0]) * (std::size_t(iy) + std::size_t(n[1]) * iz);
    }
    Vec3 center(int ix, int iy, int iz) const {
        const Vec3 s = h();
        return {origin[0] + (ix + 0.5) * s[0],
                origin[1] + (iy + 0.5) * s[1],
                origin[2] + (iz + 0.5) * s[2]};
    }
    Vec3 center(std::size_t idx) const {
        const int ix = int(idx % n[0]);
        const int iy = int((idx / n[0]) % n[1]);
        const int iz = int(idx / (std::size_t(n[0]) * n[1]));
        return center(ix, iy, iz);
    }

    bool operator==(const GridSpec& o) const = default;

    /// Throws if the grid cannot host a scene (degenerate box, n < 4, or the
    /// box does not contain the origin).
    void validate() const;
};

enum class FieldKind { Real, Complex };

/// A scalar volumetric field sampled on a GridSpec. Real-kind fields keep
/// zero imaginary parts by construction.
struct FieldOnGrid {
    GridSpec grid;
    std::vector<cplx> values;
    FieldKind kind = FieldKind::Complex;

    FieldOnGrid() = default;
    FieldOnGrid(const GridSpec& g, FieldKind k = FieldKind::Complex)
        : grid(g), values(g.num_voxels(), cplx(0.0, 0.0)), kind(k) {}

    static FieldOnGrid real(const GridSpec& g) { return FieldOnGrid(g, FieldKind::Real); }

    std::size_t size() const { return values.size(); }
    cplx& operator[](std::size_t i) { return values[i]; }
    const cplx& operator[](std::size_t i) const { return values[i]; }

    void check_consistent() const {
        if (values.size() != grid.num_voxels())
            throw std::invalid_argument("FieldOnGrid: values length does not match grid");
    }
};

inline void require_same_grid(const GridSpec& a, const GridSpec& b, const char* what) {
    if (!(a == b)) throw std::invalid_argument(std::string(what) + ": grid mismatch");
}

// Pointwise field algebra; grids must agree.
FieldOnGrid operator+(const FieldOnGrid& a, const FieldOnGrid& b);
FieldOnGrid operator-(const FieldOnGrid& a, const FieldOnGrid& b);
FieldOnGrid operator*(cplx s, const FieldOnGrid& a);
void add_in_place(FieldOnGrid& a, const FieldOnGrid& b);
/// Pointwise product with a real field (e.g. multiplication by a potential).
FieldOnGrid multiply(const std::vector<double>& real_factor, const FieldOnGrid& a);

/// Plain discrete L2 norm (sum |phi|^2 h^3)^{1/2} over the whole grid.
double l2_norm(const FieldOnGrid& f);

/// Discrete L2 norm restricted to masked voxels.
double l2_norm_on_support(const FieldOnGrid& f, const std::vector<std::uint8_t>& mask);

/// 7-point discrete Laplacian; one-voxel boundary ring is left at zero.
FieldOnGrid discrete_laplacian(const FieldOnGrid& f);

}  // namespace randscat
