#include "randscat/resolvent.hpp"

#include <cmath>

#include "randscat/fft.hpp"
#include "randscat/rng.hpp"

namespace randscat {

ResolventOperator::ResolventOperator(const GridSpec& grid, WaveNumber k, Method method)
    : grid_(grid), k_(k.k), method_(method) {
    grid_.validate();
    padded_ = {2 * grid_.n[0], 2 * grid_.n[1], 2 * grid_.n[2]};
    const Vec3 h = grid_.h();
    const std::size_t pcount = std::size_t(padded_[0]) * padded_[1] * padded_[2];

    kernel_.assign(pcount, cplx(0.0, 0.0));
    // Difference vectors dx in (-n, n), stored wrapped so that circular
    // convolution on the doubled grid reproduces the linear convolution.
    for (int dz = -grid_.n[2] + 1; dz < grid_.n[2]; ++dz)
        for (int dy = -grid_.n[1] + 1; dy < grid_.n[1]; ++dy)
            for (int dx = -grid_.n[0] + 1; dx < grid_.n[0]; ++dx) {
                const std::size_t w =
                    std::size_t((dx + padded_[0]) % padded_[0]) +
                    std::size_t(padded_[0]) * (std::size_t((dy + padded_[1]) % padded_[1]) +
                                               std::size_t(padded_[1]) *
                                                   std::size_t((dz + padded_[2]) % padded_[2]));
                if (dx == 0 && dy == 0 && dz == 0) {
                    kernel_[w] = self_cell_average(k_, grid_.voxel_volume());
                } else {
                    const double r = std::sqrt(dx * dx * h[0] * h[0] + dy * dy * h[1] * h[1] +
                                               dz * dz * h[2] * h[2]);
                    kernel_[w] = green_eval(k_, r);
                }
            }

    if (method_ == Method::FastConvolution) {
        kernel_fft_ = kernel_;
        fft::c2c(kernel_fft_, padded_, /*forward=*/true);
        kernel_.clear();
        kernel_.shrink_to_fit();
    }
}

cplx ResolventOperator::kernel_at_offset(int dx, int dy, int dz) const {
    if (dx == 0 && dy == 0 && dz == 0) return self_cell_average(k_, grid_.voxel_volume());
    const Vec3 h = grid_.h();
    const double r =
        std::sqrt(dx * dx * h[0] * h[0] + dy * dy * h[1] * h[1] + dz * dz * h[2] * h[2]);
    return green_eval(k_, r);
}

FieldOnGrid ResolventOperator::apply(const FieldOnGrid& field) const {
    field.check_consistent();
    require_same_grid(field.grid, grid_, "apply_resolvent");
    return method_ == Method::DirectSum ? apply_direct(field) : apply_fast(field);
}

FieldOnGrid ResolventOperator::apply_conj(const FieldOnGrid& field) const {
    FieldOnGrid tmp(field.grid);
    for (std::size_t i = 0; i < field.size(); ++i) tmp[i] = std::conj(field[i]);
    FieldOnGrid out = apply(tmp);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::conj(out[i]);
    return out;
}

FieldOnGrid ResolventOperator::apply_direct(const FieldOnGrid& field) const {
    FieldOnGrid out(grid_);
    const double hv = grid_.voxel_volume();

    // Only nonzero sources contribute; scenes are compactly supported.
    std::vector<std::size_t> src;
    for (std::size_t j = 0; j < field.size(); ++j)
        if (field[j] != cplx(0.0, 0.0)) src.push_back(j);

    std::size_t idx = 0;
    for (int iz = 0; iz < grid_.n[2]; ++iz)
        for (int iy = 0; iy < grid_.n[1]; ++iy)
            for (int ix = 0; ix < grid_.n[0]; ++ix, ++idx) {
                cplx acc(0.0, 0.0);
                for (std::size_t j : src) {
                    const int jx = int(j % grid_.n[0]);
                    const int jy = int((j / grid_.n[0]) % grid_.n[1]);
                    const int jz = int(j / (std::size_t(grid_.n[0]) * grid_.n[1]));
                    acc += kernel_at_offset(ix - jx, iy - jy, iz - jz) * field[j];
                }
                out[idx] = acc * hv;
            }
    return out;
}

FieldOnGrid ResolventOperator::apply_fast(const FieldOnGrid& field) const {
    const std::size_t pcount = std::size_t(padded_[0]) * padded_[1] * padded_[2];
    std::vector<cplx> buf(pcount, cplx(0.0, 0.0));
    for (int iz = 0; iz < grid_.n[2]; ++iz)
        for (int iy = 0; iy < grid_.n[1]; ++iy) {
            const std::size_t src = grid_.index(0, iy, iz);
            const std::size_t dst =
                std::size_t(padded_[0]) * (std::size_t(iy) + std::size_t(padded_[1]) * iz);
            for (int ix = 0; ix < grid_.n[0]; ++ix) buf[dst + ix] = field[src + ix];
        }

    fft::c2c(buf, padded_, /*forward=*/true);
    const double scale = grid_.voxel_volume() / double(pcount);
    for (std::size_t i = 0; i < pcount; ++i) buf[i] *= kernel_fft_[i] * scale;
    fft::c2c(buf, padded_, /*forward=*/false);

    FieldOnGrid out(grid_);
    for (int iz = 0; iz < grid_.n[2]; ++iz)
        for (int iy = 0; iy < grid_.n[1]; ++iy) {
            const std::size_t dst = grid_.index(0, iy, iz);
            const std::size_t src =
                std::size_t(padded_[0]) * (std::size_t(iy) + std::size_t(padded_[1]) * iz);
            for (int ix = 0; ix < grid_.n[0]; ++ix) out[dst + ix] = buf[src + ix];
        }
    return out;
}

namespace {

double masked_norm2(const FieldOnGrid& f, const std::vector<std::uint8_t>& mask) {
    double acc = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i)
        if (mask[i]) acc += std::norm(f[i]);
    return acc;
}

void mask_in_place(FieldOnGrid& f, const std::vector<std::uint8_t>& mask) {
    for (std::size_t i = 0; i < f.size(); ++i)
        if (!mask[i]) f[i] = cplx(0.0, 0.0);
}

}  // namespace

ContractionReport estimate_contraction(const ResolventOperator& R, const std::vector<double>& V,
                                       const std::vector<std::uint8_t>& domain_mask, int trials,
                                       std::uint64_t seed) {
    if (trials < 1) throw std::invalid_argument("estimate_contraction: trials must be >= 1");
    const GridSpec& g = R.grid();
    if (V.size() != g.num_voxels() || domain_mask.size() != g.num_voxels())
        throw std::invalid_argument("estimate_contraction: size mismatch");

    ContractionReport report;
    report.k = R.k();

    bool v_zero = true;
    for (double v : V)
        if (v != 0.0) {
            v_zero = false;
            break;
        }
    if (v_zero) {
        report.norm_estimate = 0.0;
        report.iterations = 0;
        report.converged = true;
        return report;
    }

    // Power iteration on A*A with A = P_D R_k M_V; the singular value is the
    // square root of the dominant Rayleigh quotient.
    auto apply_A = [&](const FieldOnGrid& x) {
        FieldOnGrid y = R.apply(multiply(V, x));
        mask_in_place(y, domain_mask);
        return y;
    };
    auto apply_At = [&](const FieldOnGrid& x) {
        FieldOnGrid y = x;
        mask_in_place(y, domain_mask);
        return multiply(V, R.apply_conj(y));
    };

    double best = 0.0;
    int total_iters = 0;
    constexpr int kMaxIters = 60;
    constexpr double kRelTol = 1e-4;

    for (int t = 0; t < trials; ++t) {
        FieldOnGrid v(g);
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (!domain_mask[i]) continue;
            v[i] = cplx(2.0 * rng::uniform_at(seed + 1000 * t, 2 * i) - 1.0,
                        2.0 * rng::uniform_at(seed + 1000 * t, 2 * i + 1) - 1.0);
        }
        double nv = std::sqrt(masked_norm2(v, domain_mask));
        if (nv == 0.0) continue;
        for (auto& z : v.values) z /= nv;

        double sigma = 0.0;
        for (int it = 0; it < kMaxIters; ++it) {
            ++total_iters;
            FieldOnGrid Av = apply_A(v);
            const double new_sigma = std::sqrt(masked_norm2(Av, domain_mask));
            FieldOnGrid u = apply_At(Av);
            const double nu = l2_norm(u);
            if (nu == 0.0) {
                sigma = 0.0;
                break;
            }
            for (auto& z : u.values) z /= nu;
            v = std::move(u);
            if (it > 2 && std::abs(new_sigma - sigma) <= kRelTol * std::max(new_sigma, 1e-300)) {
                sigma = new_sigma;
                break;
            }
            sigma = new_sigma;
        }
        best = std::max(best, sigma);
    }

    report.norm_estimate = best;
    report.iterations = total_iters;
    report.converged = best < 1.0;
    return report;
}

}  // namespace randscat
