#include "randscat/correlogram.hpp"

#include <cmath>

namespace randscat {

namespace {

const double k_recovery_constant = 4.0 * std::sqrt(2.0 * M_PI);  // = 16 pi^2 / (2 pi)^{3/2}

struct BandGather {
    std::vector<cplx> base;     // u_inf(k_i)
    std::vector<cplx> shifted;  // u_inf(k_i + tau)
};

BandGather gather_band(const FarFieldDataset& data, const Vec3& xhat, double tau, double K,
                       int n_k) {
    if (!(tau >= 0.0)) throw std::invalid_argument("band_correlogram: tau must be >= 0");
    if (!(K > 0.0)) throw std::invalid_argument("band_correlogram: K must be > 0");
    if (n_k < 1) throw std::invalid_argument("band_correlogram: n_k must be >= 1");

    // Single-realization estimator: every record must carry the same seed.
    std::optional<std::optional<std::int64_t>> the_seed;
    for (const auto& s : data.seeds_present()) {
        if (!the_seed)
            the_seed = s;
        else if (*the_seed != s)
            throw std::invalid_argument("band_correlogram: mixed seeds in dataset");
    }
    if (!the_seed) throw std::invalid_argument("band_correlogram: empty dataset");

    BandGather out;
    std::vector<MeasurementRequest> missing;
    const double dk = K / n_k;
    for (int i = 0; i < n_k; ++i) {
        const double k = K + (i + 0.5) * dk;
        const FarFieldRecord* a = data.find(xhat, k, std::nullopt, *the_seed);
        const FarFieldRecord* b = data.find(xhat, k + tau, std::nullopt, *the_seed);
        if (!a) missing.push_back({k, xhat, std::nullopt, *the_seed});
        if (!b && tau != 0.0) missing.push_back({k + tau, xhat, std::nullopt, *the_seed});
        if (a) out.base.push_back(a->value);
        if (tau == 0.0) {
            if (a) out.shifted.push_back(a->value);
        } else if (b) {
            out.shifted.push_back(b->value);
        }
    }
    if (!missing.empty()) throw CoverageGapError(std::move(missing));
    return out;
}

}  // namespace

CorrelogramSample band_correlogram(const FarFieldDataset& data, const Vec3& xhat, double tau,
                                   double K, int n_k) {
    const BandGather g = gather_band(data, xhat, tau, K, n_k);
    cplx acc(0.0, 0.0);
    for (int i = 0; i < n_k; ++i) acc += std::conj(g.base[i]) * g.shifted[i];
    CorrelogramSample s;
    s.tau = tau;
    s.xhat = xhat;
    s.K = K;
    s.value = acc / double(n_k);  // (1/K) integral with midpoint weight K/n_k
    s.variant = CorrelogramVariant::RawFarField;
    return s;
}

VarianceHatEstimate recover_sigma2_hat(const FarFieldDataset& data, const Vec3& xhat, double tau,
                                       const BandSchedule& schedule) {
    schedule.validate();
    VarianceHatEstimate out;
    for (double K : schedule.K_list) {
        const CorrelogramSample s = band_correlogram(data, xhat, tau, K, schedule.n_k);
        out.trend.push_back({K, k_recovery_constant * s.value, 0.0});
    }
    out.estimate = out.trend.back().value;
    for (auto& row : out.trend) row.dev_from_final = std::abs(row.value - out.estimate);
    return out;
}

StabilityTable variance_statistical_stability(const FarFieldDataset& multi_seed_data,
                                              const Vec3& xhat, double tau,
                                              const std::vector<double>& K_list, int n_k) {
    // Partition the dataset per seed once, then reuse band_correlogram.
    std::vector<std::optional<std::int64_t>> seeds = multi_seed_data.seeds_present();
    std::vector<std::int64_t> real_seeds;
    for (const auto& s : seeds)
        if (s) real_seeds.push_back(*s);
    if (real_seeds.size() < 50)
        throw std::invalid_argument(
            "variance_statistical_stability: need at least 50 seeds for a meaningful slope");

    StabilityTable table;
    table.seed_count = int(real_seeds.size());

    std::vector<FarFieldDataset> per_seed(real_seeds.size());
    for (std::size_t i = 0; i < real_seeds.size(); ++i) {
        for (const auto& r : multi_seed_data.records())
            if (r.seed && *r.seed == real_seeds[i]) per_seed[i].add(r);
    }

    for (double K : K_list) {
        std::vector<cplx> values;
        values.reserve(real_seeds.size());
        for (const auto& ds : per_seed)
            values.push_back(band_correlogram(ds, xhat, tau, K, n_k).value);

        cplx mean(0.0, 0.0);
        for (const cplx& v : values) mean += v;
        mean /= double(values.size());
        double var = 0.0;
        for (const cplx& v : values) var += std::norm(v - mean);
        var /= double(values.size() - 1);
        // standard error of a variance estimate under approximate normality
        const double se = var * std::sqrt(2.0 / double(values.size() - 1));
        table.rows.push_back({K, var, se});
    }

    // OLS fit of log(var) against log(K).
    const std::size_t m = table.rows.size();
    if (m >= 2) {
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        for (const auto& r : table.rows) {
            const double x = std::log(r.K);
            const double y = std::log(r.variance);
            sx += x;
            sy += y;
            sxx += x * x;
            sxy += x * y;
        }
        const double denom = m * sxx - sx * sx;
        table.slope = (m * sxy - sx * sy) / denom;
        const double intercept = (sy - table.slope * sx) / m;
        double ss_res = 0.0;
        for (const auto& r : table.rows) {
            const double resid = std::log(r.variance) - (intercept + table.slope * std::log(r.K));
            ss_res += resid * resid;
        }
        if (m > 2) {
            const double s2 = ss_res / double(m - 2);
            table.slope_stderr = std::sqrt(s2 * m / denom);
        }
    }
    return table;
}

}  // namespace randscat
