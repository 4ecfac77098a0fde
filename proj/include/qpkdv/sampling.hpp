#pragma once

#include <random>

#include "qpkdv/spectral.hpp"

namespace qpkdv {

enum class Parity { none, even, odd };

// Random real field with |u_{l,j}| ~ amplitude * exp(-decay * <l,j>), limited to
// sup|l| <= band_phi and |j| <= band_x (negative band = whole truncation).
spectral::FourierField random_field(const spectral::Truncation& t, std::mt19937_64& rng,
                                    double amplitude = 1.0, double decay = 0.0,
                                    Parity parity = Parity::none, int band_phi = -1,
                                    int band_x = -1);

}  // namespace qpkdv
