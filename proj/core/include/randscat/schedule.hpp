#pragma once

#include <vector>

#include "randscat/grid.hpp"

namespace randscat {

/// Frequency-band schedule for the correlogram estimators. Valid schedules
/// satisfy the P(2+gamma) growth condition K_j >= c * j^{2+gamma}, which is
/// what makes the single-realization band averages converge.
struct BandSchedule {
    double gamma = 0.1;
    double c = 1.0;
    std::vector<int> j_list;
    std::vector<double> K_list;
    int n_k = 32;

    /// K_j = c * j^(2+gamma) over the given band indices.
    static BandSchedule polynomial(double c, double gamma, const std::vector<int>& j_list, int n_k);

    /// Explicit band edges (e.g. dyadic); the growth constant is derived as
    /// min_j K_j / j^{2+gamma} and must come out positive.
    static BandSchedule explicit_bands(const std::vector<double>& K_list, double gamma, int n_k);

    void validate() const;

    /// Midpoint quadrature nodes of the band [K, 2K].
    std::vector<double> band_nodes(double K) const;

    double final_band() const { return K_list.back(); }
};

}  // namespace randscat
