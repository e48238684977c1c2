#include "randscat/potential.hpp"

#include <algorithm>
#include <cmath>

namespace randscat {

void DirectionTriple::validate() const {
    if (!is_unit(xhat) || !is_unit(d1) || !is_unit(d2))
        throw std::invalid_argument("DirectionTriple: xhat, d1, d2 must be unit vectors");
    const Vec3 diff = k * (xhat - d1);
    if (norm(diff - p) > 1e-10)
        throw std::invalid_argument("DirectionTriple: k(xhat - d1) != p");
    if (!(k > 0.0)) throw std::invalid_argument("DirectionTriple: k must be positive");
}

DirectionTriple make_direction_triple(const Vec3& p, double k) {
    if (!all_finite(p)) throw std::invalid_argument("make_direction_triple: non-finite p");
    const double pn = norm(p);
    if (!(k > pn / 2.0))
        throw std::invalid_argument("make_direction_triple: requires k > |p|/2");

    DirectionTriple t;
    t.p = p;
    t.k = k;
    if (pn == 0.0) {
        t.xhat = {1, 0, 0};
        t.d1 = {1, 0, 0};
        t.d2 = {0, 1, 0};
        t.validate();
        return t;
    }

    // Deterministic orthogonal axis: swap the two largest-magnitude
    // components of p and negate one; the remaining component goes to zero.
    int a = 0, b = 1;
    {
        std::array<int, 3> order{0, 1, 2};
        std::sort(order.begin(), order.end(),
                  [&](int i, int j) { return std::abs(p[i]) > std::abs(p[j]); });
        a = order[0];
        b = order[1];
    }
    Vec3 perp{0, 0, 0};
    perp[a] = -p[b];
    perp[b] = p[a];
    if (norm(perp) < 1e-300) {
        // p had a single nonzero component along axis a; any other axis works.
        perp = {0, 0, 0};
        perp[(a + 1) % 3] = 1.0;
    }
    const Vec3 e = normalized(perp);

    const double along = std::sqrt(1.0 - pn * pn / (4.0 * k * k));
    t.xhat = normalized(along * e + (1.0 / (2.0 * k)) * p);
    t.d1 = normalized(along * e - (1.0 / (2.0 * k)) * p);
    t.d2 = (1.0 / pn) * p;
    t.validate();
    return t;
}

PotentialHatEstimate potential_hat_estimate(const FarFieldDataset& data, const Vec3& p,
                                            const std::vector<double>& k_list) {
    if (k_list.empty()) throw std::invalid_argument("potential_hat_estimate: empty k list");

    // Single realization: all records must share one seed.
    std::optional<std::optional<std::int64_t>> the_seed;
    for (const auto& s : data.seeds_present()) {
        if (!the_seed)
            the_seed = s;
        else if (*the_seed != s)
            throw std::invalid_argument("potential_hat_estimate: mixed seeds in dataset");
    }
    if (!the_seed) throw std::invalid_argument("potential_hat_estimate: empty dataset");

    std::vector<double> ks = k_list;
    std::sort(ks.begin(), ks.end());

    const double scale = std::sqrt(2.0 / M_PI);
    PotentialHatEstimate out;
    std::vector<MeasurementRequest> missing;
    for (double k : ks) {
        const DirectionTriple t = make_direction_triple(p, k);
        const FarFieldRecord* r1 = data.find(t.xhat, k, t.d1, *the_seed);
        const FarFieldRecord* r2 = data.find(t.xhat, k, t.d2, *the_seed);
        if (!r1) missing.push_back({k, t.xhat, t.d1, *the_seed});
        if (!r2) missing.push_back({k, t.xhat, t.d2, *the_seed});
        if (r1 && r2) out.per_k.push_back({k, scale * (r1->value - r2->value)});
    }
    if (!missing.empty()) throw CoverageGapError(std::move(missing));

    if (out.per_k.size() >= 2) {
        // Fit estimate(k) = hat(V)(p) + a/k through the two largest k.
        const auto& lo = out.per_k[out.per_k.size() - 2];
        const auto& hi = out.per_k.back();
        out.estimate = (hi.k * hi.raw - lo.k * lo.raw) / (hi.k - lo.k);
        out.extrapolated = true;
    } else {
        out.estimate = out.per_k.back().raw;
        out.extrapolated = false;
    }
    return out;
}

FieldOnGrid reconstruct_potential(const std::vector<PolarSample>& samples, const GridSpec& target,
                                  GriddingDiagnostics* diag) {
    return invert_polar_samples(samples, target, /*clamp_nonnegative=*/false, diag);
}

}  // namespace randscat
