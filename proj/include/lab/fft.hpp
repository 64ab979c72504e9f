#pragma once

#include <complex>
#include <vector>

namespace lab::detail {

// In-place 2-D complex DFT on row-major rows x cols data.
// sign = -1: forward (e^{-2pi i ...}), sign = +1: backward.
// Unnormalized, FFTW convention; callers apply their own 1/(rows*cols).
void dft2(std::vector<std::complex<double>>& data, int rows, int cols, int sign);

}  // namespace lab::detail
