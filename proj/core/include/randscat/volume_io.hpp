#pragma once

#include <string>
#include <vector>

#include "randscat/grid.hpp"

namespace randscat {

/// Raw volume format: little-endian float64, x-fastest voxel order, no header.
void write_raw_volume(const std::string& path, const std::vector<double>& values);
std::vector<double> read_raw_volume(const std::string& path, std::size_t expected_count);

/// Real/imaginary split of a complex field (two raw volumes).
void write_complex_volume(const std::string& re_path, const std::string& im_path,
                          const FieldOnGrid& f);

/// Atomic write: contents go to a temp file in the same directory, then rename.
void write_file_atomic(const std::string& path, const std::string& contents);
std::string read_file(const std::string& path);

}  // namespace randscat
