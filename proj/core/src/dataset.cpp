#include "randscat/dataset.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "randscat/digest.hpp"
#include "randscat/volume_io.hpp"

namespace randscat {

namespace {

constexpr std::int64_t kNoSeed = -1;

std::array<double, 10> record_slots(const FarFieldRecord& r) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    const Vec3 d = r.d.value_or(Vec3{nan, nan, nan});
    const std::int64_t seed = r.seed.value_or(kNoSeed);
    return {r.xhat[0], r.xhat[1], r.xhat[2], r.k,
            d[0],      d[1],      d[2],      std::bit_cast<double>(seed),
            r.value.real(),        r.value.imag()};
}

int key_rank(const std::optional<Vec3>& d) { return d.has_value() ? 1 : 0; }

/// RANDSCAT_THREADS env override; hardware concurrency by default.
int synthesis_thread_count() {
    if (const char* env = std::getenv("RANDSCAT_THREADS")) {
        const int n = std::atoi(env);
        if (n >= 1) return n;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : int(hw);
}

}  // namespace

void FarFieldRecord::validate() const {
    if (!is_unit(xhat)) throw std::invalid_argument("FarFieldRecord: xhat must be a unit vector");
    if (!(k > 0.0) || !std::isfinite(k)) throw std::invalid_argument("FarFieldRecord: bad k");
    if (d && !is_unit(*d)) throw std::invalid_argument("FarFieldRecord: d must be a unit vector");
    if (!std::isfinite(value.real()) || !std::isfinite(value.imag()))
        throw std::invalid_argument("FarFieldRecord: non-finite value");
}

bool request_less(const MeasurementRequest& a, const MeasurementRequest& b) {
    if (a.k != b.k) return a.k < b.k;
    if (a.xhat != b.xhat) return a.xhat < b.xhat;
    if (key_rank(a.d) != key_rank(b.d)) return key_rank(a.d) < key_rank(b.d);
    if (a.d && b.d && *a.d != *b.d) return *a.d < *b.d;
    const auto sa = a.seed.value_or(kNoSeed);
    const auto sb = b.seed.value_or(kNoSeed);
    return sa < sb;
}

bool request_equal_key(const MeasurementRequest& a, const MeasurementRequest& b) {
    return a.k == b.k && a.xhat == b.xhat && a.d == b.d &&
           a.seed.value_or(kNoSeed) == b.seed.value_or(kNoSeed);
}

CoverageGapError::CoverageGapError(std::vector<MeasurementRequest> miss)
    : std::runtime_error([&] {
          std::ostringstream ss;
          ss << "coverage gap: " << miss.size() << " far-field sample(s) absent;";
          const std::size_t shown = std::min<std::size_t>(miss.size(), 8);
          for (std::size_t i = 0; i < shown; ++i)
              ss << " (k=" << miss[i].k << ", xhat=[" << miss[i].xhat[0] << "," << miss[i].xhat[1]
                 << "," << miss[i].xhat[2] << "])";
          if (shown < miss.size()) ss << " ...";
          return ss.str();
      }()),
      missing(std::move(miss)) {}

std::string FarFieldDataset::key_of(const Vec3& xhat, double k, const std::optional<Vec3>& d,
                                    const std::optional<std::int64_t>& seed) const {
    std::array<std::uint64_t, 8> bits{};
    bits[0] = std::bit_cast<std::uint64_t>(xhat[0]);
    bits[1] = std::bit_cast<std::uint64_t>(xhat[1]);
    bits[2] = std::bit_cast<std::uint64_t>(xhat[2]);
    bits[3] = std::bit_cast<std::uint64_t>(k);
    const Vec3 dv = d.value_or(Vec3{0, 0, 0});
    bits[4] = std::bit_cast<std::uint64_t>(dv[0]) ^ (d ? 0x1ull : 0x2ull << 62);
    bits[5] = std::bit_cast<std::uint64_t>(dv[1]);
    bits[6] = std::bit_cast<std::uint64_t>(dv[2]);
    bits[7] = static_cast<std::uint64_t>(seed.value_or(kNoSeed));
    return std::string(reinterpret_cast<const char*>(bits.data()), sizeof(bits));
}

void FarFieldDataset::add(const FarFieldRecord& rec) {
    rec.validate();
    const std::string key = key_of(rec.xhat, rec.k, rec.d, rec.seed);
    if (index_.count(key)) throw std::invalid_argument("FarFieldDataset: duplicate record key");
    index_.emplace(key, records_.size());
    records_.push_back(rec);
}

const FarFieldRecord* FarFieldDataset::find(const Vec3& xhat, double k,
                                            const std::optional<Vec3>& d,
                                            const std::optional<std::int64_t>& seed) const {
    const auto it = index_.find(key_of(xhat, k, d, seed));
    return it == index_.end() ? nullptr : &records_[it->second];
}

std::vector<std::optional<std::int64_t>> FarFieldDataset::seeds_present() const {
    std::vector<std::optional<std::int64_t>> seeds;
    for (const auto& r : records_) {
        bool seen = false;
        for (const auto& s : seeds)
            if (s == r.seed) {
                seen = true;
                break;
            }
        if (!seen) seeds.push_back(r.seed);
    }
    return seeds;
}

void FarFieldDataset::sort_canonical() {
    std::sort(records_.begin(), records_.end(), [](const FarFieldRecord& a, const FarFieldRecord& b) {
        MeasurementRequest ra{a.k, a.xhat, a.d, a.seed};
        MeasurementRequest rb{b.k, b.xhat, b.d, b.seed};
        return request_less(ra, rb);
    });
    index_.clear();
    for (std::size_t i = 0; i < records_.size(); ++i)
        index_.emplace(key_of(records_[i].xhat, records_[i].k, records_[i].d, records_[i].seed), i);
}

void FarFieldDataset::merge(const FarFieldDataset& other) {
    if (!other.scene_digest_.empty()) {
        if (scene_digest_.empty())
            scene_digest_ = other.scene_digest_;
        else if (scene_digest_ != other.scene_digest_)
            throw std::invalid_argument("FarFieldDataset::merge: scene digests differ");
    }
    for (const auto& r : other.records_) add(r);
    sort_canonical();
}

void save_dataset(const FarFieldDataset& ds, const std::string& manifest_path) {
    namespace fs = std::filesystem;
    const fs::path manifest(manifest_path);
    const fs::path dir = manifest.has_parent_path() ? manifest.parent_path() : fs::path(".");
    const std::string bin_name = manifest.stem().string() + ".bin";

    std::string bytes;
    bytes.reserve(ds.records().size() * sizeof(std::array<double, 10>));
    for (const auto& r : ds.records()) {
        const auto slots = record_slots(r);
        bytes.append(reinterpret_cast<const char*>(slots.data()), sizeof(slots));
    }
    write_file_atomic((dir / bin_name).string(), bytes);

    Fnv1a d;
    d.update(bytes.data(), bytes.size());

    nlohmann::json j;
    j["format_version"] = 1;
    j["scene_digest"] = ds.scene_digest();
    j["records"] = bin_name;
    j["record_count"] = ds.records().size();
    j["records_digest"] = d.hex();
    j["solver"] = {{"tol", ds.config().tol},
                   {"max_terms", ds.config().max_terms},
                   {"method", ds.config().method}};
    write_file_atomic(manifest_path, j.dump(2) + "\n");
}

FarFieldDataset load_dataset(const std::string& manifest_path) {
    namespace fs = std::filesystem;
    const nlohmann::json j = nlohmann::json::parse(read_file(manifest_path));
    if (j.at("format_version").get<int>() != 1)
        throw std::runtime_error("dataset manifest: unsupported format version");

    FarFieldDataset ds;
    ds.set_scene_digest(j.at("scene_digest").get<std::string>());
    SolverSnapshot cfg;
    cfg.tol = j.at("solver").at("tol").get<double>();
    cfg.max_terms = j.at("solver").at("max_terms").get<int>();
    cfg.method = j.at("solver").at("method").get<std::string>();
    ds.set_config(cfg);

    const fs::path dir = fs::path(manifest_path).parent_path();
    const std::string bytes = read_file((dir / j.at("records").get<std::string>()).string());

    Fnv1a d;
    d.update(bytes.data(), bytes.size());
    if (d.hex() != j.at("records_digest").get<std::string>())
        throw std::runtime_error("dataset record block does not match its manifest digest: " +
                                 manifest_path);

    const std::size_t count = j.at("record_count").get<std::size_t>();
    if (bytes.size() != count * 80)
        throw std::runtime_error("dataset record block has unexpected size: " + manifest_path);

    for (std::size_t i = 0; i < count; ++i) {
        std::array<double, 10> slots;
        std::memcpy(slots.data(), bytes.data() + i * sizeof(slots), sizeof(slots));
        FarFieldRecord r;
        r.xhat = {slots[0], slots[1], slots[2]};
        r.k = slots[3];
        if (!std::isnan(slots[4])) r.d = Vec3{slots[4], slots[5], slots[6]};
        const auto seed = std::bit_cast<std::int64_t>(slots[7]);
        if (seed != kNoSeed) r.seed = seed;
        r.value = cplx(slots[8], slots[9]);
        ds.add(r);
    }
    ds.sort_canonical();
    return ds;
}

FarFieldDataset synthesize_dataset(const MediumScene& scene,
                                   std::vector<MeasurementRequest> requests,
                                   const SolverOptions& opts) {
    if (requests.empty()) throw std::invalid_argument("synthesize_dataset: empty request list");
    scene.validate();

    std::sort(requests.begin(), requests.end(), request_less);
    requests.erase(std::unique(requests.begin(), requests.end(), request_equal_key),
                   requests.end());

    FarFieldDataset ds;
    ds.set_scene_digest(scene.content_digest());
    ds.set_config({opts.tol, opts.max_terms,
                   opts.method == ResolventOperator::Method::FastConvolution ? "fast-convolution"
                                                                             : "direct-sum"});

    // Requests are sorted by k, so each k-group shares one workspace (kernel
    // table, gate, operand chains) and each seed in the group one noise draw.
    std::vector<std::pair<std::size_t, std::size_t>> groups;
    {
        std::size_t i = 0;
        while (i < requests.size()) {
            std::size_t end = i;
            while (end < requests.size() && requests[end].k == requests[i].k) ++end;
            groups.emplace_back(i, end);
            i = end;
        }
    }

    std::vector<FarFieldRecord> results(requests.size());
    auto run_group = [&](std::size_t gi) {
        const auto [begin, end] = groups[gi];
        ForwardWorkspace ws(scene, WaveNumber(requests[begin].k), opts);
        std::optional<std::int64_t> noise_seed;
        std::optional<NoiseRealization> noise;
        for (std::size_t r = begin; r < end; ++r) {
            const MeasurementRequest& req = requests[r];
            const NoiseRealization* noise_ptr = nullptr;
            if (req.seed) {
                if (!noise || noise_seed != req.seed) {
                    noise = draw_noise(scene.grid, *req.seed);
                    noise_seed = req.seed;
                }
                noise_ptr = &*noise;
            }
            IncidentConfig inc;
            inc.alpha = req.d ? 1 : 0;
            if (req.d) inc.d = *req.d;
            FarFieldRecord rec;
            rec.xhat = req.xhat;
            rec.k = req.k;
            rec.d = req.d;
            rec.seed = req.seed;
            try {
                rec.value = ws.far_field_value(req.xhat, inc, noise_ptr);
            } catch (const std::exception& e) {
                std::ostringstream ss;
                ss << "synthesize_dataset: solve failed at (k=" << req.k << ", xhat=["
                   << req.xhat[0] << "," << req.xhat[1] << "," << req.xhat[2] << "]"
                   << (req.d ? ", active" : ", passive")
                   << (req.seed ? ", seed=" + std::to_string(*req.seed) : "") << "): " << e.what();
                throw std::runtime_error(ss.str());
            }
            results[r] = rec;
        }
    };

    // Groups are independent; record slots are preassigned so the output is
    // identical for any worker count.
    const int threads = std::min<int>(synthesis_thread_count(), int(groups.size()));
    if (threads <= 1) {
        for (std::size_t gi = 0; gi < groups.size(); ++gi) run_group(gi);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        std::mutex err_mutex;
        std::exception_ptr first_error;
        for (int t = 0; t < threads; ++t)
            pool.emplace_back([&] {
                for (;;) {
                    const std::size_t gi = next.fetch_add(1);
                    if (gi >= groups.size()) return;
                    try {
                        run_group(gi);
                    } catch (...) {
                        std::lock_guard<std::mutex> lock(err_mutex);
                        if (!first_error) first_error = std::current_exception();
                        return;
                    }
                }
            });
        for (auto& th : pool) th.join();
        if (first_error) std::rethrow_exception(first_error);
    }

    for (const auto& rec : results) ds.add(rec);
    ds.sort_canonical();
    return ds;
}

std::vector<MeasurementRequest> make_product_requests(
    const std::vector<double>& k_list, const std::vector<Vec3>& xhat_list,
    const std::vector<Vec3>& d_list, const std::vector<std::int64_t>& seeds,
    MeasurementMode mode) {
    if (k_list.empty() || xhat_list.empty())
        throw std::invalid_argument("make_product_requests: empty k or xhat list");
    if (mode == MeasurementMode::Active && d_list.empty())
        throw std::invalid_argument("make_product_requests: active mode needs incident directions");

    std::vector<MeasurementRequest> out;
    const std::vector<Vec3> dirs = mode == MeasurementMode::Active ? d_list : std::vector<Vec3>{{}};
    for (double k : k_list)
        for (const Vec3& xhat : xhat_list)
            for (const Vec3& d : dirs) {
                if (seeds.empty()) {
                    MeasurementRequest r{k, xhat, std::nullopt, std::nullopt};
                    if (mode == MeasurementMode::Active) r.d = d;
                    out.push_back(r);
                } else {
                    for (std::int64_t s : seeds) {
                        MeasurementRequest r{k, xhat, std::nullopt, s};
                        if (mode == MeasurementMode::Active) r.d = d;
                        out.push_back(r);
                    }
                }
            }
    return out;
}

}  // namespace randscat
