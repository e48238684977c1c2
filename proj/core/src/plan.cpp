#include <algorithm>
#include <filesystem>
#include <set>

#include <nlohmann/json.hpp>

#include "randscat/digest.hpp"
#include "randscat/pipeline.hpp"
#include "randscat/volume_io.hpp"

namespace randscat {

namespace {

using nlohmann::json;

Vec3 vec_from(const json& j) { return {j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>()}; }

std::vector<Vec3> xhat_spec_from(const json& j) {
    // either an explicit list of unit vectors or {"fibonacci": count}
    std::vector<Vec3> out;
    if (j.is_object() && j.contains("fibonacci")) {
        for (const Vec3& v : fibonacci_directions(j.at("fibonacci").get<int>())) out.push_back(v);
    } else {
        for (const auto& e : j) out.push_back(normalized(vec_from(e)));
    }
    return out;
}

json xhat_list_to_json(const std::vector<Vec3>& v) {
    json out = json::array();
    for (const auto& x : v) out.push_back({x[0], x[1], x[2]});
    return out;
}

std::vector<std::int64_t> seeds_from(const json& j) {
    std::vector<std::int64_t> out;
    if (j.is_object()) {
        const auto first = j.at("first").get<std::int64_t>();
        const auto count = j.at("count").get<std::int64_t>();
        for (std::int64_t s = first; s < first + count; ++s) out.push_back(s);
    } else {
        for (const auto& e : j) out.push_back(e.get<std::int64_t>());
    }
    return out;
}

}  // namespace

void ExperimentConfig::check() const {
    if (mode != "variance" && mode != "potential" && mode != "source" && mode != "validate")
        throw std::invalid_argument("ExperimentConfig: unknown mode '" + mode + "'");
    if (scene_path.empty() || !std::filesystem::exists(scene_path))
        throw std::invalid_argument("ExperimentConfig: scene file does not exist: " + scene_path);
    if (output_dir.empty()) throw std::invalid_argument("ExperimentConfig: output_dir required");
    solver.validate();
    if (mode == "variance") {
        if (!variance) throw std::invalid_argument("ExperimentConfig: variance block required");
        if (variance->tau_grid.empty())
            throw std::invalid_argument("ExperimentConfig: empty tau grid");
        if (variance->xhat_list.empty())
            throw std::invalid_argument("ExperimentConfig: empty xhat list");
        BandSchedule::explicit_bands(variance->bands, variance->gamma, variance->n_k);
    }
    if (mode == "potential") {
        if (!potential) throw std::invalid_argument("ExperimentConfig: potential block required");
        if (potential->k_list.empty() || potential->p_points.empty())
            throw std::invalid_argument("ExperimentConfig: potential needs k_list and p points");
    }
    if (mode == "source") {
        if (!source) throw std::invalid_argument("ExperimentConfig: source block required");
        if (source->seeds.size() < 2)
            throw std::invalid_argument("ExperimentConfig: source mode needs >= 2 seeds");
        if (!is_unit(source->d_fixed))
            throw std::invalid_argument("ExperimentConfig: source d must be a unit vector");
    }
    if (mode == "validate" && !validate)
        throw std::invalid_argument("ExperimentConfig: validate block required");
}

ExperimentConfig ExperimentConfig::from_json_text(const std::string& text) {
    const json j = json::parse(text);
    if (j.at("format_version").get<int>() != 1)
        throw std::invalid_argument("ExperimentConfig: unsupported format version");

    ExperimentConfig c;
    c.mode = j.at("mode").get<std::string>();
    c.scene_path = j.at("scene").get<std::string>();
    c.output_dir = j.at("output_dir").get<std::string>();
    c.seed = j.value("seed", std::int64_t(1));
    if (j.contains("solver")) {
        const auto& s = j.at("solver");
        c.solver.tol = s.value("tol", 1e-8);
        c.solver.max_terms = s.value("max_terms", 25);
        const std::string m = s.value("method", std::string("fast-convolution"));
        c.solver.method = m == "direct-sum" ? ResolventOperator::Method::DirectSum
                                            : ResolventOperator::Method::FastConvolution;
    }

    if (j.contains("variance")) {
        const auto& v = j.at("variance");
        VarianceConfig vc;
        vc.gamma = v.value("gamma", 0.1);
        vc.n_k = v.value("n_k", 32);
        for (const auto& e : v.at("bands")) vc.bands.push_back(e.get<double>());
        for (const auto& e : v.at("tau_grid")) vc.tau_grid.push_back(e.get<double>());
        vc.xhat_list = xhat_spec_from(v.at("xhat_list"));
        vc.stability_seeds = v.value("stability_seeds", 0);
        if (v.contains("stability_bands"))
            for (const auto& e : v.at("stability_bands")) vc.stability_bands.push_back(e.get<double>());
        c.variance = vc;
    }
    if (j.contains("potential")) {
        const auto& p = j.at("potential");
        PotentialConfig pc;
        for (const auto& e : p.at("k_list")) pc.k_list.push_back(e.get<double>());
        for (const auto& e : p.at("p_points")) pc.p_points.push_back(vec_from(e));
        c.potential = pc;
    }
    if (j.contains("source")) {
        const auto& s = j.at("source");
        SourceConfig sc;
        sc.seeds = seeds_from(s.at("seeds"));
        sc.d_fixed = normalized(vec_from(s.at("d")));
        sc.p_max = s.value("p_max", 8.0);
        sc.max_refine = s.value("max_refine", 5);
        sc.eigen_count = s.value("eigen_count", 10);
        sc.stderr_groups = s.value("stderr_groups", 8);
        c.source = sc;
    }
    if (j.contains("validate")) {
        const auto& v = j.at("validate");
        ValidateConfig vc;
        vc.mc_seeds = v.value("mc_seeds", 10000);
        if (v.contains("contraction_k_list")) {
            vc.contraction_k_list.clear();
            for (const auto& e : v.at("contraction_k_list"))
                vc.contraction_k_list.push_back(e.get<double>());
        }
        c.validate = vc;
    }
    return c;
}

ExperimentConfig ExperimentConfig::from_json_file(const std::string& path) {
    return from_json_text(read_file(path));
}

std::string ExperimentConfig::to_json_text() const {
    json j;
    j["format_version"] = 1;
    j["mode"] = mode;
    j["scene"] = scene_path;
    j["output_dir"] = output_dir;
    j["seed"] = seed;
    j["solver"] = {{"tol", solver.tol},
                   {"max_terms", solver.max_terms},
                   {"method", solver.method == ResolventOperator::Method::DirectSum
                                  ? "direct-sum"
                                  : "fast-convolution"}};
    if (variance) {
        json v;
        v["gamma"] = variance->gamma;
        v["n_k"] = variance->n_k;
        v["bands"] = variance->bands;
        v["tau_grid"] = variance->tau_grid;
        v["xhat_list"] = xhat_list_to_json(variance->xhat_list);
        v["stability_seeds"] = variance->stability_seeds;
        if (!variance->stability_bands.empty()) v["stability_bands"] = variance->stability_bands;
        j["variance"] = v;
    }
    if (potential) {
        json p;
        p["k_list"] = potential->k_list;
        p["p_points"] = xhat_list_to_json(potential->p_points);
        j["potential"] = p;
    }
    if (source) {
        json s;
        s["seeds"] = source->seeds;
        s["d"] = {source->d_fixed[0], source->d_fixed[1], source->d_fixed[2]};
        s["p_max"] = source->p_max;
        s["max_refine"] = source->max_refine;
        s["eigen_count"] = source->eigen_count;
        s["stderr_groups"] = source->stderr_groups;
        j["source"] = s;
    }
    if (validate) {
        json v;
        v["mc_seeds"] = validate->mc_seeds;
        v["contraction_k_list"] = validate->contraction_k_list;
        j["validate"] = v;
    }
    return j.dump(2) + "\n";
}

std::string ExperimentConfig::digest() const {
    Fnv1a d;
    d.update_string(to_json_text());
    return d.hex();
}

std::vector<MeasurementRequest> plan_measurements(const ExperimentConfig& config,
                                                  const MediumScene& scene) {
    config.check();
    std::vector<MeasurementRequest> requests;

    if (config.mode == "variance") {
        const VarianceConfig& vc = *config.variance;
        const BandSchedule schedule = BandSchedule::explicit_bands(vc.bands, vc.gamma, vc.n_k);
        // Distinct k points per xhat: band nodes plus their tau-shifts, merged.
        std::set<double> ks;
        for (double K : schedule.K_list)
            for (double k : schedule.band_nodes(K)) {
                ks.insert(k);
                for (double tau : vc.tau_grid) ks.insert(k + tau);
            }
        for (const Vec3& xhat : vc.xhat_list)
            for (double k : ks) requests.push_back({k, xhat, std::nullopt, config.seed});

        if (vc.stability_seeds > 0) {
            const std::vector<double>& bands =
                vc.stability_bands.empty() ? vc.bands : vc.stability_bands;
            std::set<double> stab_ks;
            for (double K : bands)
                for (double k : schedule.band_nodes(K)) stab_ks.insert(k);
            for (const Vec3& xhat : vc.xhat_list)
                for (double k : stab_ks)
                    for (int s = 0; s < vc.stability_seeds; ++s)
                        requests.push_back({k, xhat, std::nullopt, config.seed + 1 + s});
        }
    } else if (config.mode == "potential") {
        const PotentialConfig& pc = *config.potential;
        for (const Vec3& p : pc.p_points)
            for (double k : pc.k_list) {
                const DirectionTriple t = make_direction_triple(p, k);
                requests.push_back({k, t.xhat, t.d1, config.seed});
                requests.push_back({k, t.xhat, t.d2, config.seed});
            }
    } else if (config.mode == "source") {
        const SourceConfig& sc = *config.source;
        const std::vector<FrequencyProbe> probes = dual_lattice_probes(scene.grid, sc.p_max);
        if (probes.empty())
            throw std::invalid_argument("plan_measurements: p_max excludes every frequency node");
        for (const FrequencyProbe& probe : probes)
            for (std::int64_t s : sc.seeds)
                requests.push_back({probe.k, probe.xhat, sc.d_fixed, s});
    }
    // validate mode plans no far-field measurements

    std::sort(requests.begin(), requests.end(), request_less);
    requests.erase(std::unique(requests.begin(), requests.end(), request_equal_key),
                   requests.end());
    return requests;
}

void save_requests(const std::vector<MeasurementRequest>& requests, const std::string& mode,
                   const std::string& scene_digest, const std::string& path) {
    json j;
    j["format_version"] = 1;
    j["mode"] = mode;
    j["scene_digest"] = scene_digest;
    json arr = json::array();
    for (const auto& r : requests) {
        json e;
        e["k"] = r.k;
        e["xhat"] = {r.xhat[0], r.xhat[1], r.xhat[2]};
        if (r.d) e["d"] = {(*r.d)[0], (*r.d)[1], (*r.d)[2]};
        if (r.seed) e["seed"] = *r.seed;
        arr.push_back(e);
    }
    j["requests"] = arr;
    write_file_atomic(path, j.dump(2) + "\n");
}

std::vector<MeasurementRequest> load_requests(const std::string& path, std::string* scene_digest) {
    const json j = json::parse(read_file(path));
    if (j.at("format_version").get<int>() != 1)
        throw std::runtime_error("requests file: unsupported format version");
    if (scene_digest) *scene_digest = j.value("scene_digest", std::string());
    std::vector<MeasurementRequest> out;
    for (const auto& e : j.at("requests")) {
        MeasurementRequest r;
        r.k = e.at("k").get<double>();
        r.xhat = vec_from(e.at("xhat"));
        if (e.contains("d")) r.d = vec_from(e.at("d"));
        if (e.contains("seed")) r.seed = e.at("seed").get<std::int64_t>();
        out.push_back(r);
    }
    return out;
}

}  // namespace randscat
