#pragma once

#include <optional>
#include <string>

#include "randscat/correlogram.hpp"
#include "randscat/potential.hpp"
#include "randscat/source.hpp"
#include "randscat/variance.hpp"

namespace randscat {

struct VarianceConfig {
    double gamma = 0.1;
    std::vector<double> bands;  // explicit K_j list (validated against P(2+gamma))
    int n_k = 32;
    std::vector<double> tau_grid;
    std::vector<Vec3> xhat_list;
    int stability_seeds = 0;  // extra seeds for the across-seed variance table
    std::vector<double> stability_bands;
};

struct PotentialConfig {
    std::vector<double> k_list;
    std::vector<Vec3> p_points;
};

struct SourceConfig {
    std::vector<std::int64_t> seeds;
    Vec3 d_fixed{0, 0, 1};
    double p_max = 8.0;
    int max_refine = 5;
    int eigen_count = 10;
    int stderr_groups = 8;
};

struct ValidateConfig {
    int mc_seeds = 10000;
    std::vector<double> contraction_k_list{10.0, 20.0, 40.0, 80.0};
};

struct ExperimentConfig {
    std::string mode;  // variance | potential | source | validate
    std::string scene_path;
    std::string output_dir;
    SolverOptions solver;
    std::int64_t seed = 1;  // the single realization used by variance/potential

    std::optional<VarianceConfig> variance;
    std::optional<PotentialConfig> potential;
    std::optional<SourceConfig> source;
    std::optional<ValidateConfig> validate;

    void check() const;  // mode-required parameter groups present, files exist

    static ExperimentConfig from_json_text(const std::string& text);
    static ExperimentConfig from_json_file(const std::string& path);
    std::string to_json_text() const;
    std::string digest() const;
};

/// Deterministic measurement request list for the configured experiment.
/// Re-planning the same config yields byte-identical files.
std::vector<MeasurementRequest> plan_measurements(const ExperimentConfig& config,
                                                  const MediumScene& scene);
void save_requests(const std::vector<MeasurementRequest>& requests, const std::string& mode,
                   const std::string& scene_digest, const std::string& path);
std::vector<MeasurementRequest> load_requests(const std::string& path,
                                              std::string* scene_digest = nullptr);

struct StageStatus {
    std::string name;
    std::string status;  // done | skipped | failed
    std::string detail;
};

struct RunManifest {
    std::string config_digest;
    std::string scene_digest;
    std::string artifact_version;
    std::string created_at;
    std::string updated_at;
    std::vector<StageStatus> stages;
    std::vector<std::pair<std::string, std::string>> outputs;  // path (relative) -> digest

    std::string to_json_text() const;
    static RunManifest from_json_file(const std::string& path);
};

/// plan -> synthesize -> recover -> report, resumable: a stage is skipped when
/// its outputs already exist with digests matching the manifest and the
/// config/scene digests are unchanged.
RunManifest run_pipeline(const ExperimentConfig& config);

/// Rebuilds the CSV report tables from a completed run directory.
void emit_report(const std::string& run_dir);

}  // namespace randscat
