#pragma once

#include "randscat/grid.hpp"

namespace randscat {

/// Three-dimensional Fourier transform convention used throughout:
///   hat(phi)(p) = (2*pi)^{-3/2} * integral( exp(-i x.p) phi(x) dx ),
/// discretized as the midpoint Riemann sum over the voxel grid. The recovery
/// constants 4*sqrt(2*pi) and sqrt(2/pi) depend on this normalization.
cplx fourier_transform_hat(const FieldOnGrid& field, const Vec3& p);

/// Frequency nodes dual to a grid under the DFT: p_m = 2*pi*m/(n*h) per axis
/// with signed integer m in [-n/2, n/2). Returned in FFT storage order
/// (index i maps to m = i for i < n/2, m = i - n for i >= n/2).
Vec3 dual_frequency(const GridSpec& g, int mx, int my, int mz);
double dual_spacing(const GridSpec& g, int axis);
int dual_signed_index(int i, int n);

/// hat(phi) evaluated at every dual frequency node at once (FFT-accelerated,
/// FFT storage order). Agrees with fourier_transform_hat at the same nodes.
std::vector<cplx> fourier_hat_on_dual_grid(const FieldOnGrid& field);

/// Inverse of the convention above, sampled on the grid's voxel centers from
/// values given on the dual frequency nodes (FFT storage order):
///   phi(x_j) = (2*pi)^{-3/2} * sum_m exp(+i x_j.p_m) values_m * dp^3.
FieldOnGrid inverse_fourier_from_dual_grid(const GridSpec& g, const std::vector<cplx>& hat_values);

/// Weight spec for the weighted L2 norms: weight <x>^s with <x> = (1+|x|^2)^{1/2}.
struct WeightedNormSpec {
    double s = -0.5 - 1e-2;
    double epsilon = 1e-2;

    void validate() const {
        if (!(epsilon > 0.0)) throw std::invalid_argument("WeightedNormSpec: epsilon must be > 0");
    }
};

/// ( sum <x_j>^{2s} |phi(x_j)|^2 h^3 )^{1/2}
double weighted_norm(const FieldOnGrid& field, const WeightedNormSpec& spec);

}  // namespace randscat
