#include "qpkdv/sampling.hpp"

#include <cmath>

namespace qpkdv {

using spectral::cplx;

spectral::FourierField random_field(const spectral::Truncation& t, std::mt19937_64& rng,
                                    double amplitude, double decay, Parity parity, int band_phi,
                                    int band_x) {
    spectral::FourierField u(t);
    std::normal_distribution<double> gauss(0.0, 1.0);
    const int bp = band_phi < 0 ? t.n_phi : band_phi;
    const int bx = band_x < 0 ? t.n_x : band_x;
    for (std::size_t i = 0; i < u.size(); ++i) {
        const std::size_t p = u.partner(i);
        if (p < i) continue;
        const auto l = u.phi_of(i);
        const int j = u.j_of(i);
        const double re = gauss(rng), im = gauss(rng);
        if (spectral::sup_norm(l, t.nu) > bp || std::abs(j) > bx) continue;
        const double scale = amplitude * std::exp(-decay * spectral::bracket(l, t.nu, j));
        cplx v{re, im};
        if (parity == Parity::even) v = re;
        if (parity == Parity::odd) v = cplx(0, im);
        u.set_real_pair(l, j, scale * v);
    }
    return u;
}

}  // namespace qpkdv
