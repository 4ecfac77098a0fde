#pragma once

#include <complex>
#include <vector>

namespace qpkdv::fft {

// In-place multi-dimensional DFT over selected axes of a row-major array.
// sign = -1 is the forward (analysis) direction, +1 the backward one; unnormalized.
void transform(std::vector<std::complex<double>>& data, const std::vector<int>& shape,
               const std::vector<bool>& axes, int sign);

}  // namespace qpkdv::fft
