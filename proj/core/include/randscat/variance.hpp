#pragma once

#include "randscat/correlogram.hpp"
#include "randscat/freqgrid.hpp"

namespace randscat {

struct VarianceReconstruction {
    std::vector<PolarSample> sigma2_hat_samples;
    FieldOnGrid sigma2_field;
    GriddingDiagnostics diagnostics;
};

/// Grids sigma^2-hat point estimates (p = tau * xhat over a polar layout)
/// onto the target lattice and inverts; the result is real and nonnegative
/// by construction, with the clamped mass reported.
VarianceReconstruction reconstruct_sigma2(const std::vector<PolarSample>& samples,
                                          const GridSpec& target);

}  // namespace randscat
