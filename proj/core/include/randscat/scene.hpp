#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "randscat/grid.hpp"

namespace randscat {

/// The medium triple (sigma, V, f) on a common grid. sigma is the source
/// standard deviation (>= 0), V the potential, f the source expectation.
/// All three vanish outside the support mask, which keeps at least
/// `padding` voxels of clearance from every face of the box.
struct MediumScene {
    GridSpec grid;
    std::vector<double> sigma;
    std::vector<double> V;
    std::vector<double> f;
    std::vector<std::uint8_t> support_mask;
    int padding = 2;

    /// Verifies the structural invariants (sizes, padding clearance,
    /// finiteness, sigma >= 0, fields zero off the mask).
    void validate() const;

    /// Recomputes support_mask as the union of the three supports.
    void rebuild_support_mask();

    /// The computational domain D: the grid box shrunk by `padding` voxels
    /// per face. All L2(D) gates and eigenproblems live on this mask.
    std::vector<std::uint8_t> domain_mask() const;

    /// Largest pairwise distance between voxel centers in the support mask.
    double support_diameter() const;

    double sigma_max() const;
    double v_max() const;

    bool sigma_is_zero() const;
    bool v_is_zero() const;
    bool f_is_zero() const;

    std::string content_digest() const;

    FieldOnGrid sigma_field() const;
    FieldOnGrid v_field() const;
    FieldOnGrid f_field() const;
};

/// Built-in analytic phantoms, sampled at voxel midpoints.
namespace phantom {

/// amplitude inside |x - center| < radius, else 0.
std::vector<double> ball(const GridSpec& g, const Vec3& center, double radius, double amplitude);

/// amplitude * exp(-|x-center|^2 / (2 width^2)), truncated to 0 beyond cutoff.
std::vector<double> gaussian(const GridSpec& g, const Vec3& center, double width, double amplitude,
                             double cutoff);

}  // namespace phantom

/// Scene manifest: JSON text holding the grid plus relative paths of the
/// three raw little-endian float64 volumes (x-fastest voxel order).
void save_scene(const MediumScene& scene, const std::string& manifest_path);
MediumScene load_scene(const std::string& manifest_path);

}  // namespace randscat
