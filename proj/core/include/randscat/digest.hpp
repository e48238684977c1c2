#pragma once

#include <cstdint>
#include <string>

namespace randscat {

/// 64-bit FNV-1a content digest, used for scene hashes and pipeline
/// resumability checks (not cryptographic).
class Fnv1a {
  public:
    void update(const void* data, std::size_t len) {
        const auto* p = static_cast<const unsigned char*>(data);
        for (std::size_t i = 0; i < len; ++i) {
            state_ ^= p[i];
            state_ *= 0x100000001B3ull;
        }
    }
    template <typename T>
    void update_pod(const T& v) {
        update(&v, sizeof(T));
    }
    void update_string(const std::string& s) { update(s.data(), s.size()); }
    std::uint64_t value() const { return state_; }
    std::string hex() const;

  private:
    std::uint64_t state_ = 0xCBF29CE484222325ull;
};

std::string digest_file(const std::string& path);

}  // namespace randscat
