#include "randscat/variance.hpp"

namespace randscat {

VarianceReconstruction reconstruct_sigma2(const std::vector<PolarSample>& samples,
                                          const GridSpec& target) {
    VarianceReconstruction out;
    out.sigma2_hat_samples = samples;
    out.sigma2_field =
        invert_polar_samples(samples, target, /*clamp_nonnegative=*/true, &out.diagnostics);
    return out;
}

}  // namespace randscat
