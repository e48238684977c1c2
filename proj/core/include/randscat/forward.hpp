#pragma once

#include <cstdint>
#include <map>
#include <optional>

#include "randscat/noise.hpp"
#include "randscat/resolvent.hpp"
#include "randscat/scene.hpp"

namespace randscat {

/// Incident plane wave setup: alpha = 0 suppresses the wave (passive mode),
/// alpha = 1 sends exp(i k d.x) along the unit direction d (active mode).
struct IncidentConfig {
    int alpha = 0;
    Vec3 d{0.0, 0.0, 1.0};

    void validate() const {
        if (alpha != 0 && alpha != 1) throw std::invalid_argument("IncidentConfig: alpha must be 0 or 1");
        if (alpha == 1 && !is_unit(d)) throw std::invalid_argument("IncidentConfig: d must be a unit vector");
    }
};

struct SolverOptions {
    double tol = 1e-8;
    int max_terms = 25;
    ResolventOperator::Method method = ResolventOperator::Method::FastConvolution;
    int contraction_trials = 1;
    std::uint64_t contraction_seed = 0x5eed;

    void validate() const {
        if (!(tol > 0.0)) throw std::invalid_argument("SolverOptions: tol must be > 0");
        if (max_terms < 1) throw std::invalid_argument("SolverOptions: max_terms must be >= 1");
    }
};

struct ForwardSolveResult {
    FieldOnGrid u_sc;
    int series_terms = 0;
    double residual = 0.0;
    ContractionReport contraction;
};

struct TruncationError : std::runtime_error {
    int terms;
    double residual;
    TruncationError(int t, double r)
        : std::runtime_error("Neumann series not converged after " + std::to_string(t) +
                             " terms (residual " + std::to_string(r) + ")"),
          terms(t),
          residual(r) {}
};

/// amp_j * exp(i * sign * k * dir . x_j) as a complex field.
FieldOnGrid plane_wave_times(const GridSpec& g, const std::vector<double>& amp, double k,
                             const Vec3& dir, double sign);

/// sum_j exp(-i k xhat . y_j) sigma_j W_j  (the j = 0 noise term of the far field).
cplx pair_with_plane_wave(const NoiseRealization& noise, const std::vector<double>& sigma, double k,
                          const Vec3& xhat);

/// Shared per-(scene, k) state for forward evaluations: the resolvent kernel,
/// the contraction gate, and the Neumann-series operand chains, cached so
/// that many (xhat, d, seed) evaluations at one wave number stay cheap.
/// Not safe for concurrent use; run one workspace per worker.
class ForwardWorkspace {
  public:
    ForwardWorkspace(const MediumScene& scene, WaveNumber k, SolverOptions opts = {});

    double k() const { return k_; }
    const MediumScene& scene() const { return scene_; }
    const SolverOptions& options() const { return opts_; }
    const ResolventOperator& resolvent() const { return R_; }
    const ContractionReport& contraction() const { return gate_; }
    void require_converged() const {
        if (!gate_.converged) throw BelowThresholdError(gate_);
    }

    /// Full far-field sample u_inf(xhat, k, d, omega); the noise pointer may
    /// be null for deterministic (expectation) evaluations.
    cplx far_field_value(const Vec3& xhat, const IncidentConfig& inc, const NoiseRealization* noise);

    /// E u_inf: the deterministic part only (f term plus incident term).
    cplx deterministic_far_field(const Vec3& xhat, const IncidentConfig& inc);

    /// Leading noise term F0 and the multiple-scattering remainder F1 of the
    /// centered far field: u_inf - E u_inf = -(F0 + F1)/(4 pi).
    std::pair<cplx, cplx> born_components(const Vec3& xhat, const NoiseRealization& noise, int jmax);

    /// Mild solution via u_sc = sum_j (R_k V)^j RHS.
    ForwardSolveResult solve(const IncidentConfig& inc, const NoiseRealization* noise);

    /// sum_{j>=0} (V R_k)^j start with the workspace's truncation policy.
    FieldOnGrid born_series_sum(const FieldOnGrid& start) const;

    struct ChainStats {
        int terms = 0;
        double residual = 0.0;
    };
    ChainStats last_chain_stats() const { return last_stats_; }

  private:
    struct Chain {
        FieldOnGrid sum;
        int terms = 0;
        double residual = 0.0;
    };

    Chain build_chain(FieldOnGrid start, int max_terms) const;
    const Chain& source_chain();
    const Chain& incident_chain(const Vec3& d);
    const Chain& noise_chain(const NoiseRealization& noise, int max_terms);

    const MediumScene& scene_;
    double k_;
    SolverOptions opts_;
    ResolventOperator R_;
    ContractionReport gate_;
    std::vector<std::uint8_t> domain_mask_;

    std::optional<Chain> f_chain_;
    std::map<std::array<std::uint64_t, 3>, Chain> incident_chains_;
    std::map<std::int64_t, Chain> noise_chains_;
    ChainStats last_stats_;
};

// Single-shot conveniences around a throwaway workspace.
ForwardSolveResult solve_mild(const MediumScene& scene, WaveNumber k, const IncidentConfig& inc,
                              const NoiseRealization* noise, const SolverOptions& opts = {});
cplx far_field(const MediumScene& scene, WaveNumber k, const Vec3& xhat, const IncidentConfig& inc,
               const NoiseRealization* noise, const SolverOptions& opts = {});
std::pair<cplx, cplx> born_components(const MediumScene& scene, WaveNumber k, const Vec3& xhat,
                                      const NoiseRealization& noise, int jmax,
                                      const SolverOptions& opts = {});

}  // namespace randscat
