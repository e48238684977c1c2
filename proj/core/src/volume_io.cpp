#include "randscat/volume_io.hpp"

#include <bit>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "randscat/digest.hpp"

static_assert(std::endian::native == std::endian::little,
              "raw volume I/O assumes a little-endian host");

namespace randscat {

void write_raw_volume(const std::string& path, const std::vector<double>& values) {
    std::string bytes(reinterpret_cast<const char*>(values.data()), values.size() * sizeof(double));
    write_file_atomic(path, bytes);
}

std::vector<double> read_raw_volume(const std::string& path, std::size_t expected_count) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open raw volume: " + path);
    std::vector<double> values(expected_count);
    in.read(reinterpret_cast<char*>(values.data()), std::streamsize(expected_count * sizeof(double)));
    if (std::size_t(in.gcount()) != expected_count * sizeof(double))
        throw std::runtime_error("raw volume too short: " + path);
    char extra;
    if (in.read(&extra, 1))
        throw std::runtime_error("raw volume longer than expected: " + path);
    return values;
}

void write_complex_volume(const std::string& re_path, const std::string& im_path,
                          const FieldOnGrid& f) {
    std::vector<double> re(f.size()), im(f.size());
    for (std::size_t i = 0; i < f.size(); ++i) {
        re[i] = f[i].real();
        im[i] = f[i].imag();
    }
    write_raw_volume(re_path, re);
    write_raw_volume(im_path, im);
}

void write_file_atomic(const std::string& path, const std::string& contents) {
    namespace fs = std::filesystem;
    const fs::path target(path);
    if (target.has_parent_path()) fs::create_directories(target.parent_path());
    const fs::path tmp = target.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open for writing: " + tmp.string());
        out.write(contents.data(), std::streamsize(contents.size()));
        if (!out) throw std::runtime_error("write failed: " + tmp.string());
    }
    fs::rename(tmp, target);
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string Fnv1a::hex() const {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(state_));
    return std::string(buf);
}

std::string digest_file(const std::string& path) {
    Fnv1a d;
    const std::string bytes = read_file(path);
    d.update(bytes.data(), bytes.size());
    return d.hex();
}

}  // namespace randscat
