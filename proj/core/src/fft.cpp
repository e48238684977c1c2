#include "randscat/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <stdexcept>

namespace randscat::fft {

namespace {

std::mutex g_plan_mutex;

// Plans are created once per (shape, direction) against scratch buffers and
// re-executed with the new-array interface. fftw_execute_dft is thread-safe;
// plan creation is not, hence the mutex.
struct CachedC2C {
    fftw_plan plan = nullptr;
    fftw_complex* scratch = nullptr;
};

std::map<std::pair<std::array<int, 3>, bool>, CachedC2C>& c2c_cache() {
    static std::map<std::pair<std::array<int, 3>, bool>, CachedC2C> cache;
    return cache;
}

struct CachedDST {
    fftw_plan plan = nullptr;
    double* scratch = nullptr;
};

std::map<std::array<int, 3>, CachedDST>& dst_cache() {
    static std::map<std::array<int, 3>, CachedDST> cache;
    return cache;
}

}  // namespace

void c2c(std::vector<std::complex<double>>& data, const Idx3& n, bool forward) {
    const std::size_t count = std::size_t(n[0]) * n[1] * n[2];
    if (data.size() != count) throw std::invalid_argument("fft::c2c: data length does not match dims");

    fftw_plan plan;
    {
        std::lock_guard<std::mutex> lock(g_plan_mutex);
        auto& entry = c2c_cache()[{std::array<int, 3>{n[0], n[1], n[2]}, forward}];
        if (!entry.plan) {
            entry.scratch = fftw_alloc_complex(count);
            // FFTW uses row-major dims; our storage is x-fastest so pass (nz, ny, nx).
            entry.plan = fftw_plan_dft_3d(n[2], n[1], n[0], entry.scratch, entry.scratch,
                                          forward ? FFTW_FORWARD : FFTW_BACKWARD,
                                          FFTW_ESTIMATE | FFTW_UNALIGNED);
            if (!entry.plan) throw std::runtime_error("fft::c2c: planning failed");
        }
        plan = entry.plan;
    }
    auto* ptr = reinterpret_cast<fftw_complex*>(data.data());
    fftw_execute_dft(plan, ptr, ptr);
}

void dst1(std::vector<double>& data, const Idx3& n) {
    const std::size_t count = std::size_t(n[0]) * n[1] * n[2];
    if (data.size() != count) throw std::invalid_argument("fft::dst1: data length does not match dims");

    fftw_plan plan;
    {
        std::lock_guard<std::mutex> lock(g_plan_mutex);
        auto& entry = dst_cache()[std::array<int, 3>{n[0], n[1], n[2]}];
        if (!entry.plan) {
            entry.scratch = fftw_alloc_real(count);
            entry.plan = fftw_plan_r2r_3d(n[2], n[1], n[0], entry.scratch, entry.scratch,
                                          FFTW_RODFT00, FFTW_RODFT00, FFTW_RODFT00,
                                          FFTW_ESTIMATE | FFTW_UNALIGNED);
            if (!entry.plan) throw std::runtime_error("fft::dst1: planning failed");
        }
        plan = entry.plan;
    }
    fftw_execute_r2r(plan, data.data(), data.data());
}

}  // namespace randscat::fft
