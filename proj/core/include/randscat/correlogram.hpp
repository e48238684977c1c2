#pragma once

#include "randscat/dataset.hpp"
#include "randscat/schedule.hpp"

namespace randscat {

enum class CorrelogramVariant { RawFarField, CenteredFarField, BornComponent };

/// One frequency-band average
///   (1/K) integral_K^{2K} conj(u_inf(xhat,k)) u_inf(xhat,k+tau) dk,
/// evaluated by the midpoint rule on the dataset's band nodes.
struct CorrelogramSample {
    double tau = 0.0;
    Vec3 xhat{0, 0, 1};
    double K = 0.0;
    cplx value{0.0, 0.0};
    CorrelogramVariant variant = CorrelogramVariant::RawFarField;
};

/// All records must carry one and the same seed (single realization).
CorrelogramSample band_correlogram(const FarFieldDataset& data, const Vec3& xhat, double tau,
                                   double K, int n_k);

struct BandTrendRow {
    double K = 0.0;
    cplx value{0.0, 0.0};       // scaled estimate 4*sqrt(2*pi) * band average
    double dev_from_final = 0.0;
};

struct VarianceHatEstimate {
    cplx estimate{0.0, 0.0};  // 4*sqrt(2*pi) * final-band correlogram
    std::vector<BandTrendRow> trend;
};

/// Single-realization variance spectrum sample: the scaled correlogram at the
/// last band of the schedule, with the per-band trend alongside.
VarianceHatEstimate recover_sigma2_hat(const FarFieldDataset& data, const Vec3& xhat, double tau,
                                       const BandSchedule& schedule);

struct StabilityRow {
    double K = 0.0;
    double variance = 0.0;  // across seeds, E|X - mean|^2
    double stderr_ = 0.0;
};

struct StabilityTable {
    std::vector<StabilityRow> rows;
    double slope = 0.0;        // log variance vs log K least-squares slope
    double slope_stderr = 0.0;
    int seed_count = 0;
};

/// Across-seed variance of the band correlogram at each K (>= 50 seeds), with
/// the log-log decay slope and its standard error.
StabilityTable variance_statistical_stability(const FarFieldDataset& multi_seed_data,
                                              const Vec3& xhat, double tau,
                                              const std::vector<double>& K_list, int n_k);

}  // namespace randscat
