#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "randscat/greens.hpp"
#include "randscat/grid.hpp"

namespace randscat {

/// Outcome of the empirical contraction gate for R_k o V on L2(D).
/// converged <=> norm_estimate < 1. The gate replaces the analytic k*
/// threshold: a solve proceeds only when the estimated operator norm is
/// below one, otherwise the wave number is below threshold.
struct ContractionReport {
    double k = 0.0;
    double norm_estimate = 0.0;
    int iterations = 0;
    bool converged = false;
};

struct BelowThresholdError : std::runtime_error {
    ContractionReport report;
    explicit BelowThresholdError(const ContractionReport& r)
        : std::runtime_error("below-threshold wavenumber: estimated ||R_k V|| = " +
                             std::to_string(r.norm_estimate) + " >= 1 at k = " +
                             std::to_string(r.k)),
          report(r) {}
};

/// Volume convolution with the outgoing fundamental solution, discretized on
/// the voxel grid with an analytic equal-volume-ball self term. Immutable
/// after construction; apply() is const and safe to call concurrently.
struct ResolventOperator {
    enum class Method { DirectSum, FastConvolution };

    ResolventOperator(const GridSpec& grid, WaveNumber k, Method method = Method::FastConvolution);

    const GridSpec& grid() const { return grid_; }
    double k() const { return k_; }
    Method method() const { return method_; }

    /// (R_k phi)(x_i) = sum_j kernel(x_i - x_j) phi(x_j) h^3 over the grid.
    FieldOnGrid apply(const FieldOnGrid& field) const;

    /// Convolution with the conjugate kernel (the L2 adjoint of apply, since
    /// the kernel is symmetric in x - y).
    FieldOnGrid apply_conj(const FieldOnGrid& field) const;

    /// Kernel value for an integer voxel offset (for tests and direct sums).
    cplx kernel_at_offset(int dx, int dy, int dz) const;

  private:
    FieldOnGrid apply_direct(const FieldOnGrid& field) const;
    FieldOnGrid apply_fast(const FieldOnGrid& field) const;

    GridSpec grid_;
    double k_;
    Method method_;
    Idx3 padded_{};
    std::vector<cplx> kernel_;      // wrapped difference table (direct sum)
    std::vector<cplx> kernel_fft_;  // forward transform of the table (fast path)
};

/// Random-probe power iteration estimate of the L2(D) operator norm of
/// phi -> P_D R_k (V phi), with P_D the restriction to the masked domain.
/// Deterministic for a fixed seed. `trials` independent restarts, max taken.
ContractionReport estimate_contraction(const ResolventOperator& R, const std::vector<double>& V,
                                       const std::vector<std::uint8_t>& domain_mask, int trials,
                                       std::uint64_t seed);

}  // namespace randscat
