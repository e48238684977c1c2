#include "randscat/freqgrid.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace randscat {

namespace {

struct SymSample {
    Vec3 p;
    cplx value;
};

}  // namespace

FieldOnGrid invert_polar_samples(const std::vector<PolarSample>& samples, const GridSpec& target,
                                 bool clamp_nonnegative, GriddingDiagnostics* diag) {
    target.validate();
    if (samples.empty()) throw std::invalid_argument("invert_polar_samples: no samples");

    const Vec3 h = target.h();
    for (const auto& s : samples) {
        if (!all_finite(s.p) || !std::isfinite(s.value.real()) || !std::isfinite(s.value.imag()))
            throw std::invalid_argument("invert_polar_samples: non-finite sample");
        for (int a = 0; a < 3; ++a)
            if (std::abs(s.p[a]) * h[a] > M_PI * (1.0 + 1e-12))
                throw std::invalid_argument(
                    "invert_polar_samples: sample beyond the lattice Nyquist frequency");
    }

    GriddingDiagnostics local;
    GriddingDiagnostics& d = diag ? *diag : local;
    d.sample_count = int(samples.size());

    // Angular coverage: count directions after rounding.
    {
        std::map<std::array<long, 3>, int> dirs;
        for (const auto& s : samples) {
            const double r = norm(s.p);
            if (r < 1e-12) continue;
            const Vec3 u = normalized(s.p);
            dirs[{std::lround(u[0] * 1e6), std::lround(u[1] * 1e6), std::lround(u[2] * 1e6)}]++;
        }
        d.distinct_directions = int(dirs.size());
        d.low_angular_coverage = d.distinct_directions < 16;
    }

    // sigma^2 and V are real, so hat(g)(-p) = conj(hat(g)(p)).
    std::vector<SymSample> sym;
    sym.reserve(2 * samples.size());
    for (const auto& s : samples) {
        sym.push_back({s.p, s.value});
        if (norm(s.p) > 1e-12) sym.push_back({-s.p, std::conj(s.value)});
    }

    // Bin samples on the dual lattice so each node only scans its own and the
    // neighboring bins.
    const double dpx = dual_spacing(target, 0);
    const double dpy = dual_spacing(target, 1);
    const double dpz = dual_spacing(target, 2);
    const double cutoff = 1.5 * std::max({dpx, dpy, dpz});
    const double softening = 1e-6 * std::min({dpx, dpy, dpz});

    std::map<std::array<int, 3>, std::vector<std::size_t>> bins;
    auto bin_of = [&](const Vec3& p) {
        return std::array<int, 3>{int(std::floor(p[0] / dpx + 0.5)),
                                  int(std::floor(p[1] / dpy + 0.5)),
                                  int(std::floor(p[2] / dpz + 0.5))};
    };
    for (std::size_t i = 0; i < sym.size(); ++i) bins[bin_of(sym[i].p)].push_back(i);

    const int reach = int(std::ceil(cutoff / std::min({dpx, dpy, dpz}))) + 1;

    std::vector<cplx> nodes(target.num_voxels(), cplx(0.0, 0.0));
    d.total_nodes = int(nodes.size());
    for (int iz = 0; iz < target.n[2]; ++iz)
        for (int iy = 0; iy < target.n[1]; ++iy)
            for (int ix = 0; ix < target.n[0]; ++ix) {
                const int mx = dual_signed_index(ix, target.n[0]);
                const int my = dual_signed_index(iy, target.n[1]);
                const int mz = dual_signed_index(iz, target.n[2]);
                const Vec3 p = dual_frequency(target, mx, my, mz);

                cplx acc(0.0, 0.0);
                double wsum = 0.0;
                for (int bz = mz - reach; bz <= mz + reach; ++bz)
                    for (int by = my - reach; by <= my + reach; ++by)
                        for (int bx = mx - reach; bx <= mx + reach; ++bx) {
                            const auto it = bins.find({bx, by, bz});
                            if (it == bins.end()) continue;
                            for (std::size_t si : it->second) {
                                const double dist = norm(sym[si].p - p);
                                if (dist > cutoff) continue;
                                const double w = 1.0 / (dist + softening);
                                acc += w * sym[si].value;
                                wsum += w;
                            }
                        }
                if (wsum > 0.0) {
                    nodes[target.index(ix, iy, iz)] = acc / wsum;
                    ++d.filled_nodes;
                }
            }

    FieldOnGrid out = inverse_fourier_from_dual_grid(target, nodes);
    FieldOnGrid real_out = FieldOnGrid::real(target);
    double total_mass = 0.0, clamp_mass = 0.0;
    for (std::size_t i = 0; i < out.size(); ++i) {
        double v = out[i].real();
        total_mass += std::abs(v);
        if (clamp_nonnegative && v < 0.0) {
            clamp_mass += -v;
            v = 0.0;
        }
        real_out[i] = cplx(v, 0.0);
    }
    if (clamp_nonnegative && total_mass > 0.0) {
        d.clamp_mass = clamp_mass / total_mass;
        d.clamp_flagged = d.clamp_mass > 0.10;
    }
    return real_out;
}

}  // namespace randscat
