#include "randscat/pipeline.hpp"

#include <chrono>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <cstdlib>
#include <filesystem>
#include <set>

#include <nlohmann/json.hpp>

#include "randscat/digest.hpp"
#include "randscat/volume_io.hpp"

namespace randscat {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kArtifactVersion = "0.1.0";

std::string now_iso8601() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
    return buf;
}

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

json manifest_to_json(const RunManifest& m) {
    json j;
    j["format_version"] = 1;
    j["config_digest"] = m.config_digest;
    j["scene_digest"] = m.scene_digest;
    j["artifact_version"] = m.artifact_version;
    j["created_at"] = m.created_at;
    j["updated_at"] = m.updated_at;
    json stages = json::array();
    for (const auto& s : m.stages)
        stages.push_back({{"name", s.name}, {"status", s.status}, {"detail", s.detail}});
    j["stages"] = stages;
    json outputs = json::object();
    for (const auto& [path, digest] : m.outputs) outputs[path] = digest;
    j["outputs"] = outputs;
    return j;
}

struct PipelineState {
    ExperimentConfig config;
    MediumScene scene;
    fs::path dir;
    RunManifest manifest;
    RunManifest previous;  // loaded from disk when resuming
    bool resumable = false;

    void save_manifest() {
        manifest.updated_at = now_iso8601();
        write_file_atomic((dir / "manifest.json").string(), manifest.to_json_text());
    }

    void record_output(const std::string& rel) {
        manifest.outputs.emplace_back(rel, digest_file((dir / rel).string()));
    }

    bool outputs_intact(const std::vector<std::string>& rels) const {
        if (!resumable) return false;
        for (const auto& rel : rels) {
            const fs::path p = dir / rel;
            if (!fs::exists(p)) return false;
            bool found = false;
            for (const auto& [path, digest] : previous.outputs)
                if (path == rel) {
                    if (digest_file(p.string()) != digest) return false;
                    found = true;
                    break;
                }
            if (!found) return false;
        }
        return true;
    }

    void carry_over(const std::vector<std::string>& rels) {
        for (const auto& rel : rels)
            for (const auto& [path, digest] : previous.outputs)
                if (path == rel) manifest.outputs.emplace_back(path, digest);
    }
};

FarFieldDataset filter_by_seed(const FarFieldDataset& ds, std::optional<std::int64_t> seed) {
    FarFieldDataset out;
    out.set_scene_digest(ds.scene_digest());
    out.set_config(ds.config());
    for (const auto& r : ds.records())
        if (r.seed == seed) out.add(r);
    out.sort_canonical();
    return out;
}

// ---------------------------------------------------------------------------
// recover stages (everything written into diagnostics.json; the report stage
// turns that into CSV tables)
// ---------------------------------------------------------------------------

json recover_variance_stage(const ExperimentConfig& config, const MediumScene& scene,
                            const FarFieldDataset& dataset, const fs::path& dir) {
    const VarianceConfig& vc = *config.variance;
    const BandSchedule schedule = BandSchedule::explicit_bands(vc.bands, vc.gamma, vc.n_k);
    const FarFieldDataset single = filter_by_seed(dataset, config.seed);

    json diag;
    diag["mode"] = "variance";
    json trends = json::array();
    std::vector<PolarSample> samples;
    bool zero_tau_done = false;
    for (const Vec3& xhat : vc.xhat_list) {
        for (double tau : vc.tau_grid) {
            const VarianceHatEstimate est = recover_sigma2_hat(single, xhat, tau, schedule);
            json rows = json::array();
            for (const auto& row : est.trend)
                rows.push_back({{"K", row.K},
                                {"re", row.value.real()},
                                {"im", row.value.imag()},
                                {"dev_from_final", row.dev_from_final}});
            trends.push_back({{"tau", tau},
                              {"xhat", {xhat[0], xhat[1], xhat[2]}},
                              {"rows", rows}});
            if (tau == 0.0) {
                if (zero_tau_done) continue;  // p = 0 is direction independent
                zero_tau_done = true;
            }
            samples.push_back({tau * xhat, est.estimate});
        }
    }
    diag["trends"] = trends;

    const VarianceReconstruction recon = reconstruct_sigma2(samples, scene.grid);
    std::vector<double> volume(recon.sigma2_field.size());
    for (std::size_t i = 0; i < volume.size(); ++i) volume[i] = recon.sigma2_field[i].real();
    write_raw_volume((dir / "sigma2.f64raw").string(), volume);

    json jsamples = json::array();
    for (const auto& s : samples)
        jsamples.push_back(
            {{"p", {s.p[0], s.p[1], s.p[2]}}, {"re", s.value.real()}, {"im", s.value.imag()}});
    diag["samples"] = jsamples;
    diag["gridding"] = {{"clamp_mass", recon.diagnostics.clamp_mass},
                        {"clamp_flagged", recon.diagnostics.clamp_flagged},
                        {"distinct_directions", recon.diagnostics.distinct_directions},
                        {"low_angular_coverage", recon.diagnostics.low_angular_coverage},
                        {"filled_nodes", recon.diagnostics.filled_nodes},
                        {"total_nodes", recon.diagnostics.total_nodes}};

    if (vc.stability_seeds >= 50) {
        FarFieldDataset multi;
        multi.set_scene_digest(dataset.scene_digest());
        for (const auto& r : dataset.records())
            if (r.seed && *r.seed != config.seed) multi.add(r);
        multi.sort_canonical();
        const std::vector<double>& bands = vc.stability_bands.empty() ? vc.bands : vc.stability_bands;
        const StabilityTable table = variance_statistical_stability(
            multi, vc.xhat_list.front(), vc.tau_grid.front(), bands, vc.n_k);
        json rows = json::array();
        for (const auto& r : table.rows)
            rows.push_back({{"K", r.K}, {"variance", r.variance}, {"stderr", r.stderr_}});
        diag["stability"] = {{"rows", rows},
                             {"slope", table.slope},
                             {"slope_stderr", table.slope_stderr},
                             {"seed_count", table.seed_count}};
    }
    return diag;
}

json recover_potential_stage(const ExperimentConfig& config, const MediumScene& scene,
                             const FarFieldDataset& dataset, const fs::path& dir) {
    const PotentialConfig& pc = *config.potential;
    const FarFieldDataset single = filter_by_seed(dataset, config.seed);

    json diag;
    diag["mode"] = "potential";
    json per_p = json::array();
    std::vector<PolarSample> samples;
    for (const Vec3& p : pc.p_points) {
        const PotentialHatEstimate est = potential_hat_estimate(single, p, pc.k_list);
        json rows = json::array();
        for (const auto& row : est.per_k)
            rows.push_back({{"k", row.k}, {"re", row.raw.real()}, {"im", row.raw.imag()}});
        per_p.push_back({{"p", {p[0], p[1], p[2]}},
                         {"estimate_re", est.estimate.real()},
                         {"estimate_im", est.estimate.imag()},
                         {"extrapolated", est.extrapolated},
                         {"rows", rows}});
        samples.push_back({p, est.estimate});
    }
    diag["per_p"] = per_p;

    GriddingDiagnostics gd;
    const FieldOnGrid v_rec = reconstruct_potential(samples, scene.grid, &gd);
    std::vector<double> volume(v_rec.size());
    for (std::size_t i = 0; i < volume.size(); ++i) volume[i] = v_rec[i].real();
    write_raw_volume((dir / "potential.f64raw").string(), volume);
    diag["gridding"] = {{"distinct_directions", gd.distinct_directions},
                        {"low_angular_coverage", gd.low_angular_coverage},
                        {"filled_nodes", gd.filled_nodes},
                        {"total_nodes", gd.total_nodes}};
    return diag;
}

json recover_source_stage(const ExperimentConfig& config, const MediumScene& scene,
                          const FarFieldDataset& dataset, const fs::path& dir) {
    const SourceConfig& sc = *config.source;

    MediumScene v_scene = scene;
    std::fill(v_scene.sigma.begin(), v_scene.sigma.end(), 0.0);
    std::fill(v_scene.f.begin(), v_scene.f.end(), 0.0);
    v_scene.rebuild_support_mask();

    const std::vector<FrequencyProbe> probes = dual_lattice_probes(scene.grid, sc.p_max);
    SourceRecoveryOptions opts;
    opts.solver = config.solver;
    opts.max_refine = sc.max_refine;

    const SourceRecovery rec =
        recover_source(v_scene, dataset, probes, sc.seeds, sc.d_fixed, opts);

    std::vector<double> volume(rec.f.size());
    for (std::size_t i = 0; i < volume.size(); ++i) volume[i] = rec.f[i].real();
    write_raw_volume((dir / "source.f64raw").string(), volume);

    json diag;
    diag["mode"] = "source";
    diag["gate"] = {{"v_max", rec.v_max}, {"bound", rec.gate_bound}};
    diag["residual_history"] = rec.residual_history;
    json jsamples = json::array();
    for (const auto& s : rec.samples)
        jsamples.push_back({{"p", {s.p[0], s.p[1], s.p[2]}},
                            {"re", s.f_hat.real()},
                            {"im", s.f_hat.imag()},
                            {"stderr", s.stderr_}});
    diag["samples"] = jsamples;

    // Diagnostics against the scene's own expectation field: the lab knows
    // the phantom, so the eigenfunction residual test of the uniqueness
    // argument can run directly. Group-subsampled reconstructions provide the
    // propagated standard errors.
    const std::vector<EigenPair> pairs =
        dirichlet_eigenpairs(scene.grid, v_scene.V, v_scene.domain_mask(), sc.eigen_count);
    const FieldOnGrid f_true = scene.f_field();
    const std::vector<double> proj = eigen_projections(rec.f, f_true, pairs);

    std::vector<double> proj_stderr(proj.size(), 0.0);
    const int groups = std::min<int>(sc.stderr_groups, int(sc.seeds.size() / 2));
    if (groups >= 2) {
        std::vector<std::vector<double>> group_proj;
        for (int g = 0; g < groups; ++g) {
            std::vector<std::int64_t> part;
            for (std::size_t i = g; i < sc.seeds.size(); i += groups) part.push_back(sc.seeds[i]);
            if (part.size() < 2) continue;
            const SourceRecovery sub =
                recover_source(v_scene, dataset, probes, part, sc.d_fixed, opts);
            group_proj.push_back(eigen_projections(sub.f, f_true, pairs));
        }
        const double G = double(group_proj.size());
        for (std::size_t m = 0; m < proj.size(); ++m) {
            double mean = 0.0;
            for (const auto& gp : group_proj) mean += gp[m];
            mean /= G;
            double var = 0.0;
            for (const auto& gp : group_proj) var += (gp[m] - mean) * (gp[m] - mean);
            var /= (G - 1.0);
            proj_stderr[m] = std::sqrt(var / G);
        }
    }

    json eigen = json::array();
    for (std::size_t m = 0; m < proj.size(); ++m)
        eigen.push_back({{"m", int(m) + 1},
                         {"lambda", pairs[m].lambda},
                         {"projection", proj[m]},
                         {"stderr", proj_stderr[m]}});
    diag["eigen_residuals"] = eigen;

    // relative L2(D) error against the known phantom
    const auto domain = scene.domain_mask();
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < rec.f.size(); ++i)
        if (domain[i]) {
            num += std::norm(rec.f[i] - f_true[i]);
            den += std::norm(f_true[i]);
        }
    diag["relative_l2_error_vs_scene"] = den > 0.0 ? std::sqrt(num / den) : 0.0;
    return diag;
}

json validate_stage(const ExperimentConfig& config, const MediumScene& scene) {
    const ValidateConfig& vc = *config.validate;
    json checks = json::array();
    const GridSpec& g = scene.grid;
    const double hv = g.voxel_volume();

    // test fields: reuse the scene's sigma when present, else a bump
    std::vector<double> phi = scene.sigma_is_zero()
                                  ? phantom::gaussian(g, {0, 0, 0}, 0.15 * g.extent[0],
                                                      1.0, 0.4 * g.extent[0])
                                  : scene.sigma;
    FieldOnGrid phi_f = FieldOnGrid::real(g);
    for (std::size_t i = 0; i < phi.size(); ++i) phi_f[i] = cplx(phi[i], 0.0);

    {  // Ito isometry
        double target = 0.0;
        for (double v : phi) target += v * v;
        target *= hv;
        double mean = 0.0, m2 = 0.0;
        for (int s = 0; s < vc.mc_seeds; ++s) {
            const NoiseRealization noise = draw_noise(g, 1000000 + s);
            const double x = pair(noise, phi_f).real();
            mean += x;
            m2 += x * x;
        }
        mean /= vc.mc_seeds;
        const double var = m2 / vc.mc_seeds - mean * mean;
        const double rel = std::abs(var - target) / target;
        checks.push_back({{"name", "ito_isometry_rel_err"},
                          {"value", rel},
                          {"bound", 0.05},
                          {"pass", rel < 0.05}});
    }

    {  // Isserlis fourth moment with four shifted bumps
        std::vector<FieldOnGrid> tests;
        const double w = 0.12 * g.extent[0];
        const Vec3 c = {g.origin[0] + 0.5 * g.extent[0], g.origin[1] + 0.5 * g.extent[1],
                        g.origin[2] + 0.5 * g.extent[2]};
        const double off = 0.08 * g.extent[0];
        const Vec3 centers[4] = {{c[0] - off, c[1], c[2]},
                                 {c[0] + off, c[1], c[2]},
                                 {c[0], c[1] - off, c[2]},
                                 {c[0], c[1], c[2] + off}};
        for (const auto& cc : centers) {
            FieldOnGrid f = FieldOnGrid::real(g);
            const auto vals = phantom::gaussian(g, cc, w, 1.0, 0.35 * g.extent[0]);
            for (std::size_t i = 0; i < vals.size(); ++i) f[i] = cplx(vals[i], 0.0);
            tests.push_back(std::move(f));
        }
        double cov[4][4];
        for (int a = 0; a < 4; ++a)
            for (int b = 0; b < 4; ++b) {
                double acc = 0.0;
                for (std::size_t i = 0; i < tests[a].size(); ++i)
                    acc += tests[a][i].real() * tests[b][i].real();
                cov[a][b] = acc * hv;
            }
        const double predicted =
            cov[0][1] * cov[2][3] + cov[0][2] * cov[1][3] + cov[0][3] * cov[1][2];
        double mean4 = 0.0, m2 = 0.0, mean3 = 0.0, m23 = 0.0;
        for (int s = 0; s < vc.mc_seeds; ++s) {
            const NoiseRealization noise = draw_noise(g, 2000000 + s);
            double x[4];
            for (int a = 0; a < 4; ++a) x[a] = pair(noise, tests[a]).real();
            const double prod = x[0] * x[1] * x[2] * x[3];
            mean4 += prod;
            m2 += prod * prod;
            const double odd = x[0] * x[1] * x[2];
            mean3 += odd;
            m23 += odd * odd;
        }
        mean4 /= vc.mc_seeds;
        mean3 /= vc.mc_seeds;
        const double se4 =
            std::sqrt((m2 / vc.mc_seeds - mean4 * mean4) / vc.mc_seeds);
        const double se3 =
            std::sqrt((m23 / vc.mc_seeds - mean3 * mean3) / vc.mc_seeds);
        checks.push_back({{"name", "isserlis_fourth_moment_sigmas"},
                          {"value", std::abs(mean4 - predicted) / se4},
                          {"bound", 3.0},
                          {"pass", std::abs(mean4 - predicted) < 3.0 * se4}});
        checks.push_back({{"name", "isserlis_odd_moment_sigmas"},
                          {"value", std::abs(mean3) / se3},
                          {"bound", 3.0},
                          {"pass", std::abs(mean3) < 3.0 * se3}});
    }

    {  // contraction sweep
        json rows = json::array();
        for (double k : vc.contraction_k_list) {
            const ResolventOperator R(g, WaveNumber(k), config.solver.method);
            const ContractionReport rep =
                estimate_contraction(R, scene.V, scene.domain_mask(), 1, 0x5eed);
            rows.push_back({{"k", k},
                            {"norm", rep.norm_estimate},
                            {"norm_times_k", rep.norm_estimate * k},
                            {"converged", rep.converged}});
        }
        checks.push_back({{"name", "contraction_sweep"}, {"rows", rows}});
    }

    json diag;
    diag["mode"] = "validate";
    diag["checks"] = checks;
    return diag;
}

// ---------------------------------------------------------------------------
// report stage: diagnostics.json -> CSV tables
// ---------------------------------------------------------------------------

void write_csv(const fs::path& path, const std::string& contents) {
    write_file_atomic(path.string(), contents);
}

void report_from_diagnostics(const json& diag, const fs::path& report_dir) {
    fs::create_directories(report_dir);
    const std::string mode = diag.at("mode").get<std::string>();

    if (mode == "variance") {
        std::string csv = "tau,xhat_x,xhat_y,xhat_z,K,re,im,dev_from_final\n";
        for (const auto& t : diag.at("trends"))
            for (const auto& row : t.at("rows"))
                csv += fmt_double(t.at("tau").get<double>()) + "," +
                       fmt_double(t.at("xhat")[0].get<double>()) + "," +
                       fmt_double(t.at("xhat")[1].get<double>()) + "," +
                       fmt_double(t.at("xhat")[2].get<double>()) + "," +
                       fmt_double(row.at("K").get<double>()) + "," +
                       fmt_double(row.at("re").get<double>()) + "," +
                       fmt_double(row.at("im").get<double>()) + "," +
                       fmt_double(row.at("dev_from_final").get<double>()) + "\n";
        write_csv(report_dir / "error_vs_K.csv", csv);

        std::string scsv = "p_x,p_y,p_z,re,im\n";
        for (const auto& s : diag.at("samples"))
            scsv += fmt_double(s.at("p")[0].get<double>()) + "," +
                    fmt_double(s.at("p")[1].get<double>()) + "," +
                    fmt_double(s.at("p")[2].get<double>()) + "," +
                    fmt_double(s.at("re").get<double>()) + "," +
                    fmt_double(s.at("im").get<double>()) + "\n";
        write_csv(report_dir / "sigma2_hat_samples.csv", scsv);

        if (diag.contains("stability")) {
            std::string stcsv = "K,variance,stderr\n";
            for (const auto& r : diag.at("stability").at("rows"))
                stcsv += fmt_double(r.at("K").get<double>()) + "," +
                         fmt_double(r.at("variance").get<double>()) + "," +
                         fmt_double(r.at("stderr").get<double>()) + "\n";
            write_csv(report_dir / "stability.csv", stcsv);
            std::string slope = "slope,slope_stderr,seed_count\n";
            slope += fmt_double(diag.at("stability").at("slope").get<double>()) + "," +
                     fmt_double(diag.at("stability").at("slope_stderr").get<double>()) + "," +
                     std::to_string(diag.at("stability").at("seed_count").get<int>()) + "\n";
            write_csv(report_dir / "stability_slope.csv", slope);
        }
    } else if (mode == "potential") {
        std::string csv = "p_x,p_y,p_z,k,re,im\n";
        for (const auto& pp : diag.at("per_p"))
            for (const auto& row : pp.at("rows"))
                csv += fmt_double(pp.at("p")[0].get<double>()) + "," +
                       fmt_double(pp.at("p")[1].get<double>()) + "," +
                       fmt_double(pp.at("p")[2].get<double>()) + "," +
                       fmt_double(row.at("k").get<double>()) + "," +
                       fmt_double(row.at("re").get<double>()) + "," +
                       fmt_double(row.at("im").get<double>()) + "\n";
        write_csv(report_dir / "potential_per_k.csv", csv);

        std::string ecsv = "p_x,p_y,p_z,re,im,extrapolated\n";
        for (const auto& pp : diag.at("per_p"))
            ecsv += fmt_double(pp.at("p")[0].get<double>()) + "," +
                    fmt_double(pp.at("p")[1].get<double>()) + "," +
                    fmt_double(pp.at("p")[2].get<double>()) + "," +
                    fmt_double(pp.at("estimate_re").get<double>()) + "," +
                    fmt_double(pp.at("estimate_im").get<double>()) + "," +
                    (pp.at("extrapolated").get<bool>() ? "1" : "0") + "\n";
        write_csv(report_dir / "potential_hat_estimates.csv", ecsv);
    } else if (mode == "source") {
        std::string csv = "m,lambda,projection,stderr\n";
        for (const auto& e : diag.at("eigen_residuals"))
            csv += std::to_string(e.at("m").get<int>()) + "," +
                   fmt_double(e.at("lambda").get<double>()) + "," +
                   fmt_double(e.at("projection").get<double>()) + "," +
                   fmt_double(e.at("stderr").get<double>()) + "\n";
        write_csv(report_dir / "eigen_residuals.csv", csv);

        std::string scsv = "p_x,p_y,p_z,re,im,stderr\n";
        for (const auto& s : diag.at("samples"))
            scsv += fmt_double(s.at("p")[0].get<double>()) + "," +
                    fmt_double(s.at("p")[1].get<double>()) + "," +
                    fmt_double(s.at("p")[2].get<double>()) + "," +
                    fmt_double(s.at("re").get<double>()) + "," +
                    fmt_double(s.at("im").get<double>()) + "," +
                    fmt_double(s.at("stderr").get<double>()) + "\n";
        write_csv(report_dir / "source_hat_samples.csv", scsv);

        std::string rcsv = "iteration,relative_residual\n";
        int it = 1;
        for (const auto& r : diag.at("residual_history"))
            rcsv += std::to_string(it++) + "," + fmt_double(r.get<double>()) + "\n";
        write_csv(report_dir / "fixed_point_residuals.csv", rcsv);
    } else if (mode == "validate") {
        std::string csv = "name,value,bound,pass\n";
        for (const auto& c : diag.at("checks")) {
            if (!c.contains("value")) continue;
            csv += c.at("name").get<std::string>() + "," +
                   fmt_double(c.at("value").get<double>()) + "," +
                   fmt_double(c.at("bound").get<double>()) + "," +
                   (c.at("pass").get<bool>() ? "1" : "0") + "\n";
        }
        write_csv(report_dir / "validate_checks.csv", csv);
        for (const auto& c : diag.at("checks")) {
            if (c.at("name") != "contraction_sweep") continue;
            std::string ccsv = "k,norm,norm_times_k,converged\n";
            for (const auto& r : c.at("rows"))
                ccsv += fmt_double(r.at("k").get<double>()) + "," +
                        fmt_double(r.at("norm").get<double>()) + "," +
                        fmt_double(r.at("norm_times_k").get<double>()) + "," +
                        (r.at("converged").get<bool>() ? "1" : "0") + "\n";
            write_csv(report_dir / "contraction_sweep.csv", ccsv);
        }
    }
}

}  // namespace

std::string RunManifest::to_json_text() const { return manifest_to_json(*this).dump(2) + "\n"; }

RunManifest RunManifest::from_json_file(const std::string& path) {
    const json j = json::parse(read_file(path));
    RunManifest m;
    m.config_digest = j.at("config_digest").get<std::string>();
    m.scene_digest = j.at("scene_digest").get<std::string>();
    m.artifact_version = j.at("artifact_version").get<std::string>();
    m.created_at = j.at("created_at").get<std::string>();
    m.updated_at = j.at("updated_at").get<std::string>();
    for (const auto& s : j.at("stages"))
        m.stages.push_back({s.at("name").get<std::string>(), s.at("status").get<std::string>(),
                            s.at("detail").get<std::string>()});
    for (const auto& [key, value] : j.at("outputs").items())
        m.outputs.emplace_back(key, value.get<std::string>());
    return m;
}

RunManifest run_pipeline(const ExperimentConfig& config_in) {
    ExperimentConfig config = config_in;
    if (const char* env = std::getenv("RANDSCAT_OUTPUT_DIR")) config.output_dir = env;
    config.check();

    PipelineState st{config, load_scene(config.scene_path), fs::path(config.output_dir), {}, {},
                     false};
    fs::create_directories(st.dir);

    st.manifest.config_digest = config.digest();
    st.manifest.scene_digest = st.scene.content_digest();
    st.manifest.artifact_version = kArtifactVersion;
    st.manifest.created_at = now_iso8601();

    const fs::path manifest_path = st.dir / "manifest.json";
    if (fs::exists(manifest_path)) {
        st.previous = RunManifest::from_json_file(manifest_path.string());
        st.resumable = st.previous.config_digest == st.manifest.config_digest &&
                       st.previous.scene_digest == st.manifest.scene_digest;
        if (st.resumable) st.manifest.created_at = st.previous.created_at;
    }

    // ---- plan ----
    const std::vector<std::string> plan_outputs = {"requests.json"};
    if (st.outputs_intact(plan_outputs)) {
        st.carry_over(plan_outputs);
        st.manifest.stages.push_back({"plan", "skipped", "outputs up to date"});
    } else {
        const auto requests = plan_measurements(config, st.scene);
        save_requests(requests, config.mode, st.manifest.scene_digest,
                      (st.dir / "requests.json").string());
        st.record_output("requests.json");
        st.manifest.stages.push_back(
            {"plan", "done", std::to_string(requests.size()) + " requests"});
    }
    st.save_manifest();

    // ---- synthesize ----
    const bool needs_dataset = config.mode != "validate";
    if (needs_dataset) {
        const std::vector<std::string> synth_outputs = {"dataset.json", "dataset.bin"};
        if (st.outputs_intact(synth_outputs)) {
            st.carry_over(synth_outputs);
            st.manifest.stages.push_back({"synthesize", "skipped", "outputs up to date"});
        } else {
            std::string planned_digest;
            auto requests =
                load_requests((st.dir / "requests.json").string(), &planned_digest);
            if (planned_digest != st.manifest.scene_digest)
                throw std::runtime_error("run_pipeline: requests.json was planned for a "
                                         "different scene");
            const FarFieldDataset ds = synthesize_dataset(st.scene, std::move(requests),
                                                          config.solver);
            save_dataset(ds, (st.dir / "dataset.json").string());
            st.record_output("dataset.json");
            st.record_output("dataset.bin");
            st.manifest.stages.push_back(
                {"synthesize", "done", std::to_string(ds.records().size()) + " records"});
        }
        st.save_manifest();
    }

    // ---- recover ----
    std::vector<std::string> recover_outputs = {"diagnostics.json"};
    if (config.mode == "variance") recover_outputs.push_back("sigma2.f64raw");
    if (config.mode == "potential") recover_outputs.push_back("potential.f64raw");
    if (config.mode == "source") recover_outputs.push_back("source.f64raw");

    if (st.outputs_intact(recover_outputs)) {
        st.carry_over(recover_outputs);
        st.manifest.stages.push_back({"recover", "skipped", "outputs up to date"});
    } else {
        json diag;
        if (config.mode == "validate") {
            diag = validate_stage(config, st.scene);
        } else {
            const FarFieldDataset ds = load_dataset((st.dir / "dataset.json").string());
            if (ds.scene_digest() != st.manifest.scene_digest)
                throw std::runtime_error("run_pipeline: dataset does not match the scene");
            if (config.mode == "variance")
                diag = recover_variance_stage(config, st.scene, ds, st.dir);
            else if (config.mode == "potential")
                diag = recover_potential_stage(config, st.scene, ds, st.dir);
            else
                diag = recover_source_stage(config, st.scene, ds, st.dir);
        }
        write_file_atomic((st.dir / "diagnostics.json").string(), diag.dump(2) + "\n");
        for (const auto& rel : recover_outputs) st.record_output(rel);
        st.manifest.stages.push_back({"recover", "done", ""});
    }
    st.save_manifest();

    // ---- report ----
    emit_report(st.dir.string());
    for (const auto& entry : fs::directory_iterator(st.dir / "report"))
        if (entry.is_regular_file())
            st.record_output("report/" + entry.path().filename().string());
    st.manifest.stages.push_back({"report", "done", ""});
    st.save_manifest();
    return st.manifest;
}

void emit_report(const std::string& run_dir) {
    const fs::path dir(run_dir);
    const json diag = json::parse(read_file((dir / "diagnostics.json").string()));
    report_from_diagnostics(diag, dir / "report");
}

}  // namespace randscat
