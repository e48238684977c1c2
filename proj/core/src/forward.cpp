#include "randscat/forward.hpp"

#include <bit>
#include <cmath>

#include "randscat/transform.hpp"

namespace randscat {

namespace {
const double k_sqrt_pi_over_2 = std::sqrt(M_PI / 2.0);
const double k_pw_norm = std::pow(2.0 * M_PI, 1.5);

std::array<std::uint64_t, 3> vec_bits(const Vec3& v) {
    return {std::bit_cast<std::uint64_t>(v[0]), std::bit_cast<std::uint64_t>(v[1]),
            std::bit_cast<std::uint64_t>(v[2])};
}
}  // namespace

FieldOnGrid plane_wave_times(const GridSpec& g, const std::vector<double>& amp, double k,
                             const Vec3& dir, double sign) {
    if (amp.size() != g.num_voxels())
        throw std::invalid_argument("plane_wave_times: amplitude length mismatch");
    const Vec3 h = g.h();
    std::vector<cplx> ex(g.n[0]), ey(g.n[1]), ez(g.n[2]);
    for (int i = 0; i < g.n[0]; ++i)
        ex[i] = std::polar(1.0, sign * k * dir[0] * (g.origin[0] + (i + 0.5) * h[0]));
    for (int i = 0; i < g.n[1]; ++i)
        ey[i] = std::polar(1.0, sign * k * dir[1] * (g.origin[1] + (i + 0.5) * h[1]));
    for (int i = 0; i < g.n[2]; ++i)
        ez[i] = std::polar(1.0, sign * k * dir[2] * (g.origin[2] + (i + 0.5) * h[2]));

    FieldOnGrid out(g);
    std::size_t idx = 0;
    for (int iz = 0; iz < g.n[2]; ++iz)
        for (int iy = 0; iy < g.n[1]; ++iy) {
            const cplx eyz = ey[iy] * ez[iz];
            for (int ix = 0; ix < g.n[0]; ++ix, ++idx) out[idx] = amp[idx] * ex[ix] * eyz;
        }
    return out;
}

cplx pair_with_plane_wave(const NoiseRealization& noise, const std::vector<double>& sigma, double k,
                          const Vec3& xhat) {
    const GridSpec& g = noise.grid;
    if (sigma.size() != g.num_voxels())
        throw std::invalid_argument("pair_with_plane_wave: sigma length mismatch");
    const Vec3 h = g.h();
    std::vector<cplx> ex(g.n[0]), ey(g.n[1]), ez(g.n[2]);
    for (int i = 0; i < g.n[0]; ++i)
        ex[i] = std::polar(1.0, -k * xhat[0] * (g.origin[0] + (i + 0.5) * h[0]));
    for (int i = 0; i < g.n[1]; ++i)
        ey[i] = std::polar(1.0, -k * xhat[1] * (g.origin[1] + (i + 0.5) * h[1]));
    for (int i = 0; i < g.n[2]; ++i)
        ez[i] = std::polar(1.0, -k * xhat[2] * (g.origin[2] + (i + 0.5) * h[2]));

    cplx acc(0.0, 0.0);
    std::size_t idx = 0;
    for (int iz = 0; iz < g.n[2]; ++iz)
        for (int iy = 0; iy < g.n[1]; ++iy) {
            const cplx eyz = ey[iy] * ez[iz];
            cplx row(0.0, 0.0);
            for (int ix = 0; ix < g.n[0]; ++ix, ++idx) {
                const double w = sigma[idx] * noise.W[idx];
                if (w != 0.0) row += w * ex[ix];
            }
            acc += eyz * row;
        }
    return acc;
}

ForwardWorkspace::ForwardWorkspace(const MediumScene& scene, WaveNumber k, SolverOptions opts)
    : scene_(scene), k_(k.k), opts_(opts), R_(scene.grid, k, opts.method) {
    opts_.validate();
    domain_mask_ = scene_.domain_mask();
    gate_ = estimate_contraction(R_, scene_.V, domain_mask_, opts_.contraction_trials,
                                 opts_.contraction_seed);
}

ForwardWorkspace::Chain ForwardWorkspace::build_chain(FieldOnGrid start, int max_terms) const {
    // sum_{j>=0} (V R_k)^j start, truncated on relative L2(D) update.
    Chain chain;
    chain.sum = start;
    chain.terms = 1;
    chain.residual = 0.0;
    if (scene_.v_is_zero()) return chain;

    FieldOnGrid term = std::move(start);
    for (int j = 1; j < max_terms; ++j) {
        term = multiply(scene_.V, R_.apply(term));
        add_in_place(chain.sum, term);
        ++chain.terms;
        const double num = l2_norm_on_support(term, domain_mask_);
        const double den = l2_norm_on_support(chain.sum, domain_mask_);
        chain.residual = den > 0.0 ? num / den : 0.0;
        if (chain.residual < opts_.tol) return chain;
    }
    if (chain.residual >= opts_.tol) throw TruncationError(chain.terms, chain.residual);
    return chain;
}

const ForwardWorkspace::Chain& ForwardWorkspace::source_chain() {
    if (!f_chain_) {
        FieldOnGrid start = FieldOnGrid(scene_.grid);
        for (std::size_t i = 0; i < start.size(); ++i) start[i] = cplx(-scene_.f[i], 0.0);
        f_chain_ = build_chain(std::move(start), opts_.max_terms);
    }
    return *f_chain_;
}

const ForwardWorkspace::Chain& ForwardWorkspace::incident_chain(const Vec3& d) {
    auto it = incident_chains_.find(vec_bits(d));
    if (it == incident_chains_.end()) {
        FieldOnGrid start = plane_wave_times(scene_.grid, scene_.V, k_, d, +1.0);
        it = incident_chains_.emplace(vec_bits(d), build_chain(std::move(start), opts_.max_terms))
                 .first;
    }
    return it->second;
}

const ForwardWorkspace::Chain& ForwardWorkspace::noise_chain(const NoiseRealization& noise,
                                                             int max_terms) {
    require_same_grid(noise.grid, scene_.grid, "noise_chain");
    auto it = noise_chains_.find(noise.seed);
    if (it == noise_chains_.end()) {
        // sum_{j>=1} (V R_k)^j (sigma dB): seed the chain with V R_k(sigma dB).
        Chain chain;
        if (scene_.v_is_zero()) {
            chain.sum = FieldOnGrid(scene_.grid);
            chain.terms = 0;
            chain.residual = 0.0;
        } else {
            FieldOnGrid start = multiply(scene_.V, resolvent_of_noise(R_, scene_.sigma, noise));
            chain = build_chain(std::move(start), max_terms);
        }
        it = noise_chains_.emplace(noise.seed, std::move(chain)).first;
    }
    return it->second;
}

cplx ForwardWorkspace::far_field_value(const Vec3& xhat, const IncidentConfig& inc,
                                       const NoiseRealization* noise) {
    inc.validate();
    if (!is_unit(xhat)) throw std::invalid_argument("far_field: xhat must be a unit vector");
    require_converged();

    cplx det = deterministic_far_field(xhat, inc);
    if (!noise || scene_.sigma_is_zero()) return det;

    const cplx p0 = pair_with_plane_wave(*noise, scene_.sigma, k_, xhat);
    const Chain& z = noise_chain(*noise, opts_.max_terms);
    const cplx f1 = k_pw_norm * fourier_transform_hat(z.sum, k_ * xhat);
    return det - (p0 + f1) / (4.0 * M_PI);
}

cplx ForwardWorkspace::deterministic_far_field(const Vec3& xhat, const IncidentConfig& inc) {
    inc.validate();
    require_converged();
    const Vec3 p = k_ * xhat;
    cplx acc(0.0, 0.0);
    if (!scene_.f_is_zero()) acc += k_sqrt_pi_over_2 * fourier_transform_hat(source_chain().sum, p);
    if (inc.alpha == 1 && !scene_.v_is_zero())
        acc += k_sqrt_pi_over_2 * fourier_transform_hat(incident_chain(inc.d).sum, p);
    return acc;
}

std::pair<cplx, cplx> ForwardWorkspace::born_components(const Vec3& xhat,
                                                        const NoiseRealization& noise, int jmax) {
    if (jmax < 1) throw std::invalid_argument("born_components: jmax must be >= 1");
    require_converged();
    const cplx f0 = pair_with_plane_wave(noise, scene_.sigma, k_, xhat);
    // noise_chain holds terms j = 1..terms; jmax+1 caps the builder's count.
    const Chain& z = noise_chain(noise, std::min(opts_.max_terms, jmax + 1));
    const cplx f1 = k_pw_norm * fourier_transform_hat(z.sum, k_ * xhat);
    return {f0, f1};
}

ForwardSolveResult ForwardWorkspace::solve(const IncidentConfig& inc,
                                           const NoiseRealization* noise) {
    inc.validate();
    require_converged();

    // RHS of (I - R_k V) u_sc = alpha R_k V u^i - R_k f - R_k (sigma dB).
    FieldOnGrid rhs(scene_.grid);
    if (inc.alpha == 1 && !scene_.v_is_zero())
        add_in_place(rhs, R_.apply(plane_wave_times(scene_.grid, scene_.V, k_, inc.d, +1.0)));
    if (!scene_.f_is_zero()) {
        FieldOnGrid f = scene_.f_field();
        FieldOnGrid rf = R_.apply(f);
        for (std::size_t i = 0; i < rhs.size(); ++i) rhs[i] -= rf[i];
    }
    if (noise && !scene_.sigma_is_zero()) {
        FieldOnGrid rn = resolvent_of_noise(R_, scene_.sigma, *noise);
        for (std::size_t i = 0; i < rhs.size(); ++i) rhs[i] -= rn[i];
    }

    ForwardSolveResult result;
    result.contraction = gate_;
    result.u_sc = rhs;
    result.series_terms = 1;
    result.residual = 0.0;
    if (scene_.v_is_zero()) return result;

    FieldOnGrid term = std::move(rhs);
    for (int j = 1; j < opts_.max_terms; ++j) {
        term = R_.apply(multiply(scene_.V, term));
        add_in_place(result.u_sc, term);
        ++result.series_terms;
        const double num = l2_norm_on_support(term, domain_mask_);
        const double den = l2_norm_on_support(result.u_sc, domain_mask_);
        result.residual = den > 0.0 ? num / den : 0.0;
        if (result.residual < opts_.tol) return result;
    }
    throw TruncationError(result.series_terms, result.residual);
}

FieldOnGrid ForwardWorkspace::born_series_sum(const FieldOnGrid& start) const {
    require_converged();
    return build_chain(start, opts_.max_terms).sum;
}

ForwardSolveResult solve_mild(const MediumScene& scene, WaveNumber k, const IncidentConfig& inc,
                              const NoiseRealization* noise, const SolverOptions& opts) {
    ForwardWorkspace ws(scene, k, opts);
    return ws.solve(inc, noise);
}

cplx far_field(const MediumScene& scene, WaveNumber k, const Vec3& xhat, const IncidentConfig& inc,
               const NoiseRealization* noise, const SolverOptions& opts) {
    ForwardWorkspace ws(scene, k, opts);
    return ws.far_field_value(xhat, inc, noise);
}

std::pair<cplx, cplx> born_components(const MediumScene& scene, WaveNumber k, const Vec3& xhat,
                                      const NoiseRealization& noise, int jmax,
                                      const SolverOptions& opts) {
    ForwardWorkspace ws(scene, k, opts);
    return ws.born_components(xhat, noise, jmax);
}

}  // namespace randscat
