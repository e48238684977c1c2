#include "randscat/scene.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>

#include <nlohmann/json.hpp>

#include "randscat/digest.hpp"
#include "randscat/volume_io.hpp"

namespace randscat {

namespace {

bool in_padding(const GridSpec& g, int pad, int ix, int iy, int iz) {
    return ix < pad || iy < pad || iz < pad || ix >= g.n[0] - pad || iy >= g.n[1] - pad ||
           iz >= g.n[2] - pad;
}

FieldOnGrid to_field(const GridSpec& g, const std::vector<double>& v) {
    FieldOnGrid f = FieldOnGrid::real(g);
    for (std::size_t i = 0; i < v.size(); ++i) f[i] = cplx(v[i], 0.0);
    return f;
}

}  // namespace

void MediumScene::validate() const {
    grid.validate();
    const std::size_t count = grid.num_voxels();
    if (sigma.size() != count || V.size() != count || f.size() != count ||
        support_mask.size() != count)
        throw std::invalid_argument("MediumScene: field sizes do not match grid");
    if (padding < 2) throw std::invalid_argument("MediumScene: padding must be >= 2 voxels");

    std::size_t idx = 0;
    for (int iz = 0; iz < grid.n[2]; ++iz)
        for (int iy = 0; iy < grid.n[1]; ++iy)
            for (int ix = 0; ix < grid.n[0]; ++ix, ++idx) {
                if (!std::isfinite(sigma[idx]) || !std::isfinite(V[idx]) || !std::isfinite(f[idx]))
                    throw std::invalid_argument("MediumScene: non-finite field value");
                if (sigma[idx] < 0.0)
                    throw std::invalid_argument("MediumScene: sigma must be nonnegative");
                const bool has_value = sigma[idx] != 0.0 || V[idx] != 0.0 || f[idx] != 0.0;
                if (has_value && !support_mask[idx])
                    throw std::invalid_argument("MediumScene: nonzero value outside support mask");
                if (support_mask[idx] && in_padding(grid, padding, ix, iy, iz))
                    throw std::invalid_argument("MediumScene: support mask violates padding margin");
            }
}

void MediumScene::rebuild_support_mask() {
    support_mask.assign(grid.num_voxels(), 0);
    for (std::size_t i = 0; i < support_mask.size(); ++i)
        support_mask[i] = (sigma[i] != 0.0 || V[i] != 0.0 || f[i] != 0.0) ? 1 : 0;
}

std::vector<std::uint8_t> MediumScene::domain_mask() const {
    std::vector<std::uint8_t> mask(grid.num_voxels(), 0);
    std::size_t idx = 0;
    for (int iz = 0; iz < grid.n[2]; ++iz)
        for (int iy = 0; iy < grid.n[1]; ++iy)
            for (int ix = 0; ix < grid.n[0]; ++ix, ++idx)
                mask[idx] = in_padding(grid, padding, ix, iy, iz) ? 0 : 1;
    return mask;
}

double MediumScene::support_diameter() const {
    // Diameter of the axis-aligned bounding box of masked voxel centers.
    Vec3 lo{1e300, 1e300, 1e300}, hi{-1e300, -1e300, -1e300};
    bool any = false;
    for (std::size_t i = 0; i < support_mask.size(); ++i) {
        if (!support_mask[i]) continue;
        any = true;
        const Vec3 c = grid.center(i);
        for (int a = 0; a < 3; ++a) {
            lo[a] = std::min(lo[a], c[a]);
            hi[a] = std::max(hi[a], c[a]);
        }
    }
    if (!any) return 0.0;
    return norm(hi - lo);
}

double MediumScene::sigma_max() const {
    double m = 0.0;
    for (double v : sigma) m = std::max(m, std::abs(v));
    return m;
}

double MediumScene::v_max() const {
    double m = 0.0;
    for (double v : V) m = std::max(m, std::abs(v));
    return m;
}

bool MediumScene::sigma_is_zero() const {
    return std::all_of(sigma.begin(), sigma.end(), [](double v) { return v == 0.0; });
}
bool MediumScene::v_is_zero() const {
    return std::all_of(V.begin(), V.end(), [](double v) { return v == 0.0; });
}
bool MediumScene::f_is_zero() const {
    return std::all_of(f.begin(), f.end(), [](double v) { return v == 0.0; });
}

std::string MediumScene::content_digest() const {
    Fnv1a d;
    d.update_pod(grid.origin);
    d.update_pod(grid.extent);
    d.update_pod(grid.n);
    d.update_pod(padding);
    d.update(sigma.data(), sigma.size() * sizeof(double));
    d.update(V.data(), V.size() * sizeof(double));
    d.update(f.data(), f.size() * sizeof(double));
    return d.hex();
}

FieldOnGrid MediumScene::sigma_field() const { return to_field(grid, sigma); }
FieldOnGrid MediumScene::v_field() const { return to_field(grid, V); }
FieldOnGrid MediumScene::f_field() const { return to_field(grid, f); }

namespace phantom {

std::vector<double> ball(const GridSpec& g, const Vec3& center, double radius, double amplitude) {
    std::vector<double> out(g.num_voxels(), 0.0);
    for (std::size_t i = 0; i < out.size(); ++i) {
        const Vec3 d = g.center(i) - center;
        if (norm(d) < radius) out[i] = amplitude;
    }
    return out;
}

std::vector<double> gaussian(const GridSpec& g, const Vec3& center, double width, double amplitude,
                             double cutoff) {
    std::vector<double> out(g.num_voxels(), 0.0);
    const double inv2w2 = 1.0 / (2.0 * width * width);
    for (std::size_t i = 0; i < out.size(); ++i) {
        const Vec3 d = g.center(i) - center;
        const double r2 = dot(d, d);
        if (r2 < cutoff * cutoff) out[i] = amplitude * std::exp(-r2 * inv2w2);
    }
    return out;
}

}  // namespace phantom

void save_scene(const MediumScene& scene, const std::string& manifest_path) {
    scene.validate();
    namespace fs = std::filesystem;
    const fs::path manifest(manifest_path);
    const fs::path dir = manifest.has_parent_path() ? manifest.parent_path() : fs::path(".");
    fs::create_directories(dir);
    const std::string stem = manifest.stem().string();

    write_raw_volume((dir / (stem + "_sigma.f64raw")).string(), scene.sigma);
    write_raw_volume((dir / (stem + "_V.f64raw")).string(), scene.V);
    write_raw_volume((dir / (stem + "_f.f64raw")).string(), scene.f);

    nlohmann::json j;
    j["format_version"] = 1;
    j["grid"] = {{"origin", scene.grid.origin},
                 {"extent", scene.grid.extent},
                 {"n", scene.grid.n}};
    j["padding"] = scene.padding;
    j["sigma"] = stem + "_sigma.f64raw";
    j["V"] = stem + "_V.f64raw";
    j["f"] = stem + "_f.f64raw";
    write_file_atomic(manifest_path, j.dump(2) + "\n");
}

MediumScene load_scene(const std::string& manifest_path) {
    namespace fs = std::filesystem;
    const nlohmann::json j = nlohmann::json::parse(read_file(manifest_path));
    if (j.at("format_version").get<int>() != 1)
        throw std::runtime_error("scene manifest: unsupported format version");

    MediumScene scene;
    const auto& jg = j.at("grid");
    scene.grid.origin = jg.at("origin").get<Vec3>();
    scene.grid.extent = jg.at("extent").get<Vec3>();
    scene.grid.n = jg.at("n").get<Idx3>();
    scene.padding = j.value("padding", 2);

    const fs::path dir = fs::path(manifest_path).parent_path();
    const std::size_t count = scene.grid.num_voxels();
    auto resolve = [&](const std::string& rel) { return (dir / rel).string(); };
    scene.sigma = read_raw_volume(resolve(j.at("sigma").get<std::string>()), count);
    scene.V = read_raw_volume(resolve(j.at("V").get<std::string>()), count);
    scene.f = read_raw_volume(resolve(j.at("f").get<std::string>()), count);
    scene.rebuild_support_mask();
    scene.validate();
    return scene;
}

}  // namespace randscat
