#include "randscat/source.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "randscat/fft.hpp"
#include "randscat/transform.hpp"

namespace randscat {

namespace {

const double k_born_inverse = -std::sqrt(2.0 / M_PI);  // = -4 pi (2 pi)^{-3/2}
const double k_sqrt_pi_over_2 = std::sqrt(M_PI / 2.0);

struct BoxExtents {
    Idx3 lo{0, 0, 0};
    Idx3 ni{0, 0, 0};  // interior voxel counts
};

BoxExtents analyze_box_mask(const GridSpec& g, const std::vector<std::uint8_t>& mask) {
    if (mask.size() != g.num_voxels())
        throw std::invalid_argument("box mask length does not match grid");
    Idx3 lo{g.n[0], g.n[1], g.n[2]}, hi{-1, -1, -1};
    std::size_t count = 0, idx = 0;
    for (int iz = 0; iz < g.n[2]; ++iz)
        for (int iy = 0; iy < g.n[1]; ++iy)
            for (int ix = 0; ix < g.n[0]; ++ix, ++idx) {
                if (!mask[idx]) continue;
                ++count;
                lo = {std::min(lo[0], ix), std::min(lo[1], iy), std::min(lo[2], iz)};
                hi = {std::max(hi[0], ix), std::max(hi[1], iy), std::max(hi[2], iz)};
            }
    if (count == 0) throw std::invalid_argument("box mask is empty");
    BoxExtents box;
    box.lo = lo;
    box.ni = {hi[0] - lo[0] + 1, hi[1] - lo[1] + 1, hi[2] - lo[2] + 1};
    if (count != std::size_t(box.ni[0]) * box.ni[1] * box.ni[2])
        throw std::invalid_argument("mask is not an axis-aligned box; the eigenproblem expects "
                                    "the rectangular domain D");
    return box;
}

double axis_eigenvalue(double h, int mode, int ni) {
    const double s = std::sin(0.5 * M_PI * mode / (ni + 1));
    return 4.0 / (h * h) * s * s;
}

/// Operator, preconditioner and vectors of the interior eigenproblem.
class DirichletOperator {
  public:
    DirichletOperator(const GridSpec& g, const std::vector<double>& V, const BoxExtents& box)
        : g_(g), box_(box), h_(g.h()) {
        dof_ = std::size_t(box.ni[0]) * box.ni[1] * box.ni[2];
        v_int_.resize(dof_);
        std::size_t c = 0;
        for (int iz = 0; iz < box.ni[2]; ++iz)
            for (int iy = 0; iy < box.ni[1]; ++iy)
                for (int ix = 0; ix < box.ni[0]; ++ix, ++c)
                    v_int_[c] = V[g.index(box.lo[0] + ix, box.lo[1] + iy, box.lo[2] + iz)];
    }

    std::size_t dof() const { return dof_; }
    const BoxExtents& box() const { return box_; }

    // y = (-Laplacian_h - V) x with zero Dirichlet data outside the box
    void apply(const std::vector<double>& x, std::vector<double>& y) const {
        const double wx = 1.0 / (h_[0] * h_[0]);
        const double wy = 1.0 / (h_[1] * h_[1]);
        const double wz = 1.0 / (h_[2] * h_[2]);
        const int nx = box_.ni[0], ny = box_.ni[1], nz = box_.ni[2];
        const double diag = 2.0 * (wx + wy + wz);
        std::size_t c = 0;
        for (int iz = 0; iz < nz; ++iz)
            for (int iy = 0; iy < ny; ++iy)
                for (int ix = 0; ix < nx; ++ix, ++c) {
                    double acc = (diag - v_int_[c]) * x[c];
                    if (ix > 0) acc -= wx * x[c - 1];
                    if (ix + 1 < nx) acc -= wx * x[c + 1];
                    if (iy > 0) acc -= wy * x[c - nx];
                    if (iy + 1 < ny) acc -= wy * x[c + nx];
                    if (iz > 0) acc -= wz * x[c - std::size_t(nx) * ny];
                    if (iz + 1 < nz) acc -= wz * x[c + std::size_t(nx) * ny];
                    y[c] = acc;
                }
    }

    // z = (-Laplacian_h)^{-1} r, exact via DST-I diagonalization
    void poisson_solve(std::vector<double>& z) const {
        fft::dst1(z, box_.ni);
        std::size_t c = 0;
        for (int iz = 0; iz < box_.ni[2]; ++iz)
            for (int iy = 0; iy < box_.ni[1]; ++iy)
                for (int ix = 0; ix < box_.ni[0]; ++ix, ++c) {
                    const double lam = axis_eigenvalue(h_[0], ix + 1, box_.ni[0]) +
                                       axis_eigenvalue(h_[1], iy + 1, box_.ni[1]) +
                                       axis_eigenvalue(h_[2], iz + 1, box_.ni[2]);
                    z[c] /= lam;
                }
        fft::dst1(z, box_.ni);
        const double scale = 1.0 / (8.0 * double(box_.ni[0] + 1) * double(box_.ni[1] + 1) *
                                    double(box_.ni[2] + 1));
        for (double& v : z) v *= scale;
    }

    // Preconditioned CG on (.-Laplacian - V) x = b. Returns iterations used.
    int pcg_solve(const std::vector<double>& b, std::vector<double>& x, double rel_tol,
                  int max_iter) const {
        x.assign(dof_, 0.0);
        std::vector<double> r = b, z = b, p, Ap(dof_);
        poisson_solve(z);
        p = z;
        double rz = std::inner_product(r.begin(), r.end(), z.begin(), 0.0);
        const double b_norm = std::sqrt(std::inner_product(b.begin(), b.end(), b.begin(), 0.0));
        if (b_norm == 0.0) return 0;
        int it = 0;
        for (; it < max_iter; ++it) {
            apply(p, Ap);
            const double pAp = std::inner_product(p.begin(), p.end(), Ap.begin(), 0.0);
            const double alpha = rz / pAp;
            double r_norm2 = 0.0;
            for (std::size_t i = 0; i < dof_; ++i) {
                x[i] += alpha * p[i];
                r[i] -= alpha * Ap[i];
                r_norm2 += r[i] * r[i];
            }
            if (std::sqrt(r_norm2) <= rel_tol * b_norm) break;
            z = r;
            poisson_solve(z);
            const double rz_new = std::inner_product(r.begin(), r.end(), z.begin(), 0.0);
            const double beta = rz_new / rz;
            rz = rz_new;
            for (std::size_t i = 0; i < dof_; ++i) p[i] = z[i] + beta * p[i];
        }
        return it;
    }

  private:
    GridSpec g_;
    BoxExtents box_;
    Vec3 h_;
    std::size_t dof_ = 0;
    std::vector<double> v_int_;
};

}  // namespace

void EnsembleSpec::validate() const {
    if (seeds.size() < 2) throw std::invalid_argument("EnsembleSpec: need at least 2 seeds");
    std::vector<std::int64_t> sorted = seeds;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
        throw std::invalid_argument("EnsembleSpec: seeds must be distinct");
    if (!is_unit(d_fixed)) throw std::invalid_argument("EnsembleSpec: d_fixed must be unit");
    if (k_list.empty() || xhat_list.empty())
        throw std::invalid_argument("EnsembleSpec: k_list and xhat_list must be nonempty");
}

std::vector<FrequencyProbe> probes_from(const EnsembleSpec& spec) {
    std::vector<FrequencyProbe> out;
    for (double k : spec.k_list)
        for (const Vec3& xhat : spec.xhat_list) out.push_back({k, xhat});
    return out;
}

std::vector<FrequencyProbe> dual_lattice_probes(const GridSpec& target, double p_max) {
    std::vector<FrequencyProbe> out;
    const int half0 = target.n[0] / 2, half1 = target.n[1] / 2, half2 = target.n[2] / 2;
    for (int mz = -half2; mz <= half2; ++mz)
        for (int my = -half1; my <= half1; ++my)
            for (int mx = -half0; mx <= half0; ++mx) {
                const Vec3 p = dual_frequency(target, mx, my, mz);
                const double r = norm(p);
                if (r == 0.0 || r > p_max) continue;
                // keep one representative of each +-p pair
                if (mz < 0 || (mz == 0 && my < 0) || (mz == 0 && my == 0 && mx < 0)) continue;
                out.push_back({r, normalized(p)});
            }
    return out;
}

MeanFarField ensemble_mean_farfield(const FarFieldDataset& data, const Vec3& xhat, double k,
                                    const Vec3& d, const std::vector<std::int64_t>& seeds) {
    if (seeds.size() < 2)
        throw std::invalid_argument("ensemble_mean_farfield: need at least 2 seeds");
    std::vector<cplx> values;
    std::vector<MeasurementRequest> missing;
    for (std::int64_t s : seeds) {
        const FarFieldRecord* r = data.find(xhat, k, d, s);
        if (!r)
            missing.push_back({k, xhat, d, s});
        else
            values.push_back(r->value);
    }
    if (!missing.empty()) throw CoverageGapError(std::move(missing));

    MeanFarField out;
    out.count = int(values.size());
    cplx mean(0.0, 0.0);
    for (const cplx& v : values) mean += v;
    mean /= double(values.size());
    out.mean = mean;
    double ss = 0.0;
    for (const cplx& v : values) ss += std::norm(v - mean);
    out.stderr_ = std::sqrt(ss / (double(values.size()) * double(values.size() - 1)));
    return out;
}

SourceRecovery recover_source(const MediumScene& v_scene, const FarFieldDataset& data,
                              const std::vector<FrequencyProbe>& probes,
                              const std::vector<std::int64_t>& seeds, const Vec3& d_fixed,
                              const SourceRecoveryOptions& opts) {
    if (probes.empty()) throw std::invalid_argument("recover_source: no probes");
    if (!v_scene.f_is_zero() || !v_scene.sigma_is_zero())
        throw std::invalid_argument("recover_source: v_scene must carry the potential only");

    SourceRecovery out;
    out.v_max = v_scene.v_max();
    const std::vector<std::uint8_t> domain = v_scene.domain_mask();
    out.gate_bound = dirichlet_laplacian_lowest(v_scene.grid, domain);
    if (out.v_max >= out.gate_bound) throw SmallnessGateError(out.v_max, out.gate_bound);

    // Group probes by wave number; one workspace each.
    std::map<double, std::vector<std::size_t>> by_k;
    for (std::size_t i = 0; i < probes.size(); ++i) by_k[probes[i].k].push_back(i);

    std::map<double, std::unique_ptr<ForwardWorkspace>> workspaces;
    for (const auto& [k, idxs] : by_k) {
        auto ws = std::make_unique<ForwardWorkspace>(v_scene, WaveNumber(k), opts.solver);
        ws->require_converged();
        out.contraction.push_back(ws->contraction());
        workspaces.emplace(k, std::move(ws));
    }

    // Measured means minus the deterministic incident contribution.
    const std::size_t m = probes.size();
    std::vector<cplx> subtracted(m);
    std::vector<double> sample_stderr(m);
    IncidentConfig inc;
    inc.alpha = 1;
    inc.d = d_fixed;
    for (std::size_t i = 0; i < m; ++i) {
        const MeanFarField mf =
            ensemble_mean_farfield(data, probes[i].xhat, probes[i].k, d_fixed, seeds);
        const cplx e_inc =
            workspaces.at(probes[i].k)->deterministic_far_field(probes[i].xhat, inc);
        subtracted[i] = mf.mean - e_inc;
        sample_stderr[i] = mf.stderr_;
    }

    double m_norm = 0.0;
    for (const cplx& v : subtracted) m_norm += std::norm(v);
    m_norm = std::sqrt(m_norm);

    std::vector<cplx> f_hat(m);
    for (std::size_t i = 0; i < m; ++i) f_hat[i] = k_born_inverse * subtracted[i];

    auto invert_current = [&](GriddingDiagnostics* diag) {
        std::vector<PolarSample> samples(m);
        for (std::size_t i = 0; i < m; ++i)
            samples[i] = {probes[i].k * probes[i].xhat, f_hat[i]};
        FieldOnGrid f = invert_polar_samples(samples, v_scene.grid, /*clamp_nonnegative=*/false,
                                             diag);
        for (std::size_t i = 0; i < f.size(); ++i)
            if (!domain[i]) f[i] = cplx(0.0, 0.0);  // f is supported in D
        return f;
    };

    // Fixed-point refinement of the multiple-scattering corrections.
    for (int iter = 0; iter < opts.max_refine; ++iter) {
        const FieldOnGrid f_now = invert_current(nullptr);
        std::vector<cplx> simulated(m);
        for (const auto& [k, idxs] : by_k) {
            const FieldOnGrid chain = workspaces.at(k)->born_series_sum(cplx(-1.0, 0.0) * f_now);
            for (std::size_t i : idxs)
                simulated[i] =
                    k_sqrt_pi_over_2 * fourier_transform_hat(chain, probes[i].k * probes[i].xhat);
        }
        double r_norm = 0.0;
        for (std::size_t i = 0; i < m; ++i) r_norm += std::norm(subtracted[i] - simulated[i]);
        r_norm = std::sqrt(r_norm);
        const double rel = m_norm > 0.0 ? r_norm / m_norm : 0.0;
        out.residual_history.push_back(rel);
        if (rel < 1e-12) break;
        for (std::size_t i = 0; i < m; ++i)
            f_hat[i] += k_born_inverse * (subtracted[i] - simulated[i]);
    }

    out.f = invert_current(&out.diagnostics);
    out.samples.resize(m);
    for (std::size_t i = 0; i < m; ++i)
        out.samples[i] = {probes[i].k * probes[i].xhat, f_hat[i],
                          std::abs(k_born_inverse) * sample_stderr[i]};
    return out;
}

double dirichlet_laplacian_lowest(const GridSpec& grid, const std::vector<std::uint8_t>& box_mask) {
    const BoxExtents box = analyze_box_mask(grid, box_mask);
    const Vec3 h = grid.h();
    return axis_eigenvalue(h[0], 1, box.ni[0]) + axis_eigenvalue(h[1], 1, box.ni[1]) +
           axis_eigenvalue(h[2], 1, box.ni[2]);
}

std::vector<EigenPair> dirichlet_eigenpairs(const GridSpec& grid, const std::vector<double>& V,
                                            const std::vector<std::uint8_t>& box_mask, int count) {
    if (count < 1) throw std::invalid_argument("dirichlet_eigenpairs: count must be >= 1");
    if (V.size() != grid.num_voxels())
        throw std::invalid_argument("dirichlet_eigenpairs: V length mismatch");

    const BoxExtents box = analyze_box_mask(grid, box_mask);
    double vmax = 0.0;
    for (double v : V) vmax = std::max(vmax, std::abs(v));
    const double bound = dirichlet_laplacian_lowest(grid, box_mask);
    if (vmax >= bound) throw SmallnessGateError(vmax, bound);

    DirichletOperator op(grid, V, box);
    const std::size_t dof = op.dof();
    const int m_work = int(std::min<std::size_t>(std::size_t(count) + 8, dof));

    // Start from the analytic modes of the box Laplacian, lowest first.
    struct Mode {
        int m1, m2, m3;
        double lam;
    };
    std::vector<Mode> modes;
    const Vec3 h = grid.h();
    const int cap = std::min(box.ni[0], std::min(box.ni[1], std::min(box.ni[2], count + 9)));
    for (int m3 = 1; m3 <= cap; ++m3)
        for (int m2 = 1; m2 <= cap; ++m2)
            for (int m1 = 1; m1 <= cap; ++m1)
                modes.push_back({m1, m2, m3,
                                 axis_eigenvalue(h[0], m1, box.ni[0]) +
                                     axis_eigenvalue(h[1], m2, box.ni[1]) +
                                     axis_eigenvalue(h[2], m3, box.ni[2])});
    std::sort(modes.begin(), modes.end(), [](const Mode& a, const Mode& b) {
        if (a.lam != b.lam) return a.lam < b.lam;
        return std::array{a.m1, a.m2, a.m3} < std::array{b.m1, b.m2, b.m3};
    });

    std::vector<std::vector<double>> X(m_work, std::vector<double>(dof));
    for (int c = 0; c < m_work; ++c) {
        const Mode& md = modes[c];
        std::size_t idx = 0;
        for (int iz = 0; iz < box.ni[2]; ++iz)
            for (int iy = 0; iy < box.ni[1]; ++iy)
                for (int ix = 0; ix < box.ni[0]; ++ix, ++idx)
                    X[c][idx] = std::sin(M_PI * md.m1 * (ix + 1.0) / (box.ni[0] + 1)) *
                                std::sin(M_PI * md.m2 * (iy + 1.0) / (box.ni[1] + 1)) *
                                std::sin(M_PI * md.m3 * (iz + 1.0) / (box.ni[2] + 1));
    }

    auto dot_v = [](const std::vector<double>& a, const std::vector<double>& b) {
        return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
    };

    std::vector<double> lambda(m_work, 0.0);
    std::vector<std::vector<double>> LX(m_work, std::vector<double>(dof));
    bool converged = false;
    constexpr int kMaxOuter = 80;
    constexpr double kResTol = 1e-8;

    for (int outer = 0; outer < kMaxOuter && !converged; ++outer) {
        // Inverse iteration step
        for (int c = 0; c < m_work; ++c) {
            std::vector<double> y;
            op.pcg_solve(X[c], y, 1e-13, 800);
            X[c] = std::move(y);
        }
        // Modified Gram-Schmidt
        for (int c = 0; c < m_work; ++c) {
            for (int d = 0; d < c; ++d) {
                const double proj = dot_v(X[c], X[d]);
                for (std::size_t i = 0; i < dof; ++i) X[c][i] -= proj * X[d][i];
            }
            const double nrm = std::sqrt(dot_v(X[c], X[c]));
            if (nrm == 0.0) throw std::runtime_error("dirichlet_eigenpairs: subspace collapsed");
            for (double& v : X[c]) v /= nrm;
        }
        // Rayleigh-Ritz on the m_work-dimensional subspace
        Eigen::MatrixXd T(m_work, m_work);
        for (int c = 0; c < m_work; ++c) op.apply(X[c], LX[c]);
        for (int c = 0; c < m_work; ++c)
            for (int d = 0; d <= c; ++d) {
                const double t = dot_v(X[c], LX[d]);
                T(c, d) = t;
                T(d, c) = t;
            }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
        if (es.info() != Eigen::Success)
            throw std::runtime_error("dirichlet_eigenpairs: Rayleigh-Ritz failed");

        std::vector<std::vector<double>> Xn(m_work, std::vector<double>(dof, 0.0));
        for (int c = 0; c < m_work; ++c)
            for (int d = 0; d < m_work; ++d) {
                const double q = es.eigenvectors()(d, c);
                for (std::size_t i = 0; i < dof; ++i) Xn[c][i] += q * X[d][i];
            }
        X = std::move(Xn);
        for (int c = 0; c < m_work; ++c) lambda[c] = es.eigenvalues()(c);

        // Residual check on the requested modes
        converged = true;
        for (int c = 0; c < count; ++c) {
            op.apply(X[c], LX[c]);
            double rr = 0.0;
            for (std::size_t i = 0; i < dof; ++i) {
                const double r = LX[c][i] - lambda[c] * X[c][i];
                rr += r * r;
            }
            if (std::sqrt(rr) > kResTol * std::abs(lambda[c])) {
                converged = false;
                break;
            }
        }
    }
    if (!converged)
        throw std::runtime_error("dirichlet_eigenpairs: subspace iteration did not converge");

    std::vector<EigenPair> pairs(count);
    const double hv = grid.voxel_volume();
    for (int c = 0; c < count; ++c) {
        pairs[c].lambda = lambda[c];
        pairs[c].v = FieldOnGrid::real(grid);
        // sign convention: largest-magnitude entry positive
        double best = 0.0;
        for (double v : X[c])
            if (std::abs(v) > std::abs(best)) best = v;
        const double scale = (best < 0.0 ? -1.0 : 1.0) / std::sqrt(dot_v(X[c], X[c]) * hv);
        std::size_t idx = 0;
        for (int iz = 0; iz < box.ni[2]; ++iz)
            for (int iy = 0; iy < box.ni[1]; ++iy)
                for (int ix = 0; ix < box.ni[0]; ++ix, ++idx)
                    pairs[c].v[grid.index(box.lo[0] + ix, box.lo[1] + iy, box.lo[2] + iz)] =
                        cplx(scale * X[c][idx], 0.0);
    }
    return pairs;
}

std::vector<double> eigen_projections(const FieldOnGrid& f1, const FieldOnGrid& f2,
                                      const std::vector<EigenPair>& pairs) {
    require_same_grid(f1.grid, f2.grid, "eigen_projections");
    std::vector<double> out;
    out.reserve(pairs.size());
    const double hv = f1.grid.voxel_volume();
    for (const EigenPair& p : pairs) {
        require_same_grid(p.v.grid, f1.grid, "eigen_projections");
        double acc = 0.0;
        for (std::size_t i = 0; i < f1.size(); ++i)
            acc += (f1[i].real() - f2[i].real()) * p.v[i].real();
        out.push_back(acc * hv);
    }
    return out;
}

}  // namespace randscat
