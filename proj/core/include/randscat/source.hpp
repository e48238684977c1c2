#pragma once

#include "randscat/dataset.hpp"
#include "randscat/freqgrid.hpp"

namespace randscat {

/// Multi-realization measurement layout for expectation recovery (M3 data):
/// many seeds, one fixed incident direction.
struct EnsembleSpec {
    std::vector<std::int64_t> seeds;
    Vec3 d_fixed{0, 0, 1};
    std::vector<double> k_list;
    std::vector<Vec3> xhat_list;

    void validate() const;
};

/// One Fourier probe of the source: the far-field direction xhat at wave
/// number k samples hat(f) at p = k * xhat.
struct FrequencyProbe {
    double k = 0.0;
    Vec3 xhat{0, 0, 1};
};

std::vector<FrequencyProbe> probes_from(const EnsembleSpec& spec);

/// Dual-lattice probe layout: one probe per frequency node of the target grid
/// with 0 < |p| <= p_max (plus the p -> -p mirror being implied by symmetry),
/// half-space only. Sampling exactly on the lattice removes gridding error.
std::vector<FrequencyProbe> dual_lattice_probes(const GridSpec& target, double p_max);

struct MeanFarField {
    cplx mean{0.0, 0.0};
    double stderr_ = 0.0;
    int count = 0;
};

/// Sample mean and standard error of u_inf(xhat, k, d) across the seeds.
MeanFarField ensemble_mean_farfield(const FarFieldDataset& data, const Vec3& xhat, double k,
                                    const Vec3& d, const std::vector<std::int64_t>& seeds);

struct SmallnessGateError : std::runtime_error {
    double v_max;
    double bound;
    SmallnessGateError(double vm, double b)
        : std::runtime_error("source recovery smallness gate failed: ||V||_inf = " +
                             std::to_string(vm) + " >= " + std::to_string(b) +
                             " (lowest Dirichlet eigenvalue bound)"),
          v_max(vm),
          bound(b) {}
};

struct SourceSample {
    Vec3 p{0, 0, 0};
    cplx f_hat{0.0, 0.0};
    double stderr_ = 0.0;
};

struct SourceRecovery {
    FieldOnGrid f;
    std::vector<SourceSample> samples;
    std::vector<double> residual_history;  // relative fixed-point residuals
    GriddingDiagnostics diagnostics;
    double v_max = 0.0;
    double gate_bound = 0.0;
    std::vector<ContractionReport> contraction;
};

struct SourceRecoveryOptions {
    SolverOptions solver;
    int max_refine = 5;
};

/// Expectation recovery with V known: subtract the deterministic incident
/// contribution from the ensemble mean, invert the leading Born term
/// hat(f)(k xhat) = -4 pi (2 pi)^{-3/2} (mean - incident part), and absorb
/// the multiple-scattering corrections by re-simulating the deterministic
/// far field from the current reconstruction (at most max_refine passes).
/// v_scene carries the known potential with sigma = f = 0.
SourceRecovery recover_source(const MediumScene& v_scene, const FarFieldDataset& data,
                              const std::vector<FrequencyProbe>& probes,
                              const std::vector<std::int64_t>& seeds, const Vec3& d_fixed,
                              const SourceRecoveryOptions& opts = {});

/// Eigenpair of the Dirichlet operator -Laplacian_h - V on the masked box,
/// normalized to unit discrete L2(D) norm; v vanishes outside the mask.
struct EigenPair {
    double lambda = 0.0;
    FieldOnGrid v;
};

/// Lowest `count` eigenpairs of the 7-point operator on an axis-aligned box
/// mask. DST-preconditioned subspace iteration; residuals are driven below
/// 1e-8 * lambda. Requires ||V||_inf below the analytic lowest eigenvalue of
/// the box Laplacian (the operator stays positive).
std::vector<EigenPair> dirichlet_eigenpairs(const GridSpec& grid, const std::vector<double>& V,
                                            const std::vector<std::uint8_t>& box_mask, int count);

/// Analytic lowest eigenvalue of the discrete Dirichlet Laplacian on the box.
double dirichlet_laplacian_lowest(const GridSpec& grid, const std::vector<std::uint8_t>& box_mask);

/// <f1 - f2, v_m> in discrete L2(D) for each eigenpair; all near zero when
/// two reconstructions explain the same data.
std::vector<double> eigen_projections(const FieldOnGrid& f1, const FieldOnGrid& f2,
                                      const std::vector<EigenPair>& pairs);

}  // namespace randscat
