#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "randscat/forward.hpp"

namespace randscat {

/// One far-field sample u_inf(xhat, k, d, omega). Passive records carry no d;
/// deterministic (expectation) records carry no seed.
struct FarFieldRecord {
    Vec3 xhat{0, 0, 1};
    double k = 0.0;
    std::optional<Vec3> d;
    std::optional<std::int64_t> seed;
    cplx value{0.0, 0.0};

    void validate() const;
};

/// A far-field sample to synthesize (a record minus its value).
struct MeasurementRequest {
    double k = 0.0;
    Vec3 xhat{0, 0, 1};
    std::optional<Vec3> d;
    std::optional<std::int64_t> seed;
};

bool request_less(const MeasurementRequest& a, const MeasurementRequest& b);
bool request_equal_key(const MeasurementRequest& a, const MeasurementRequest& b);

struct CoverageGapError : std::runtime_error {
    std::vector<MeasurementRequest> missing;
    explicit CoverageGapError(std::vector<MeasurementRequest> miss);
};

struct SolverSnapshot {
    double tol = 1e-8;
    int max_terms = 25;
    std::string method = "fast-convolution";
};

/// The on-disk and in-memory currency between the forward and inverse stages.
/// Records are kept in canonical (k, xhat, d, seed) order with unique keys.
class FarFieldDataset {
  public:
    FarFieldDataset() = default;

    const std::vector<FarFieldRecord>& records() const { return records_; }
    const std::string& scene_digest() const { return scene_digest_; }
    const SolverSnapshot& config() const { return config_; }

    void set_scene_digest(std::string digest) { scene_digest_ = std::move(digest); }
    void set_config(const SolverSnapshot& cfg) { config_ = cfg; }

    /// Inserts a record; throws on duplicate (xhat, k, d, seed) keys.
    void add(const FarFieldRecord& rec);

    /// Exact-key lookup (bitwise double equality; producers and consumers
    /// share the same planning arithmetic).
    const FarFieldRecord* find(const Vec3& xhat, double k, const std::optional<Vec3>& d,
                               const std::optional<std::int64_t>& seed) const;

    /// Distinct seeds appearing in the dataset (in first-seen order).
    std::vector<std::optional<std::int64_t>> seeds_present() const;

    void sort_canonical();

    void merge(const FarFieldDataset& other);

  private:
    std::string key_of(const Vec3& xhat, double k, const std::optional<Vec3>& d,
                       const std::optional<std::int64_t>& seed) const;

    std::vector<FarFieldRecord> records_;
    std::unordered_map<std::string, std::size_t> index_;
    std::string scene_digest_;
    SolverSnapshot config_;
};

/// Dataset files: <path> is a JSON manifest; the record block lives next to
/// it as little-endian binary (x̂ float64[3], k float64, d float64[3] with
/// NaN fill when passive, seed int64 with -1 when deterministic, re, im).
void save_dataset(const FarFieldDataset& ds, const std::string& manifest_path);
FarFieldDataset load_dataset(const std::string& manifest_path);

/// Evaluates every requested sample against one scene. Requests are grouped
/// by wave number so kernel tables and operand chains are shared; the output
/// ordering is canonical and independent of scheduling.
FarFieldDataset synthesize_dataset(const MediumScene& scene,
                                   std::vector<MeasurementRequest> requests,
                                   const SolverOptions& opts = {});

enum class MeasurementMode { Passive, Active };

/// Product-style request builder: one request per (k, xhat[, d], seed) tuple.
std::vector<MeasurementRequest> make_product_requests(
    const std::vector<double>& k_list, const std::vector<Vec3>& xhat_list,
    const std::vector<Vec3>& d_list, const std::vector<std::int64_t>& seeds, MeasurementMode mode);

}  // namespace randscat
