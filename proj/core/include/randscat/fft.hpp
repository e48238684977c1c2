#pragma once

#include <complex>
#include <cstddef>
#include <vector>

#include "randscat/vec3.hpp"

namespace randscat::fft {

/// In-place 3-d complex DFT on an x-fastest array of dims n. Plans are cached
/// per shape and direction; execution is thread-safe, planning is serialized.
/// FFTW_ESTIMATE planning keeps results reproducible run to run.
void c2c(std::vector<std::complex<double>>& data, const Idx3& n, bool forward);

/// 3-d DST-I (FFTW RODFT00) on an x-fastest array of dims n. Unnormalized:
/// applying it twice multiplies by prod(2*(n[a]+1)).
void dst1(std::vector<double>& data, const Idx3& n);

}  // namespace randscat::fft
