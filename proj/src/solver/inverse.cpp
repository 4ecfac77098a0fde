#include <cmath>
#include <sstream>

#include "qpkdv/solver.hpp"

namespace qpkdv::solver {

using spectral::cplx;
using spectral::Multi;

FourierField diag_inverse(const DiagonalOperator& eigs, const Frequency& w, const FourierField& g, double gamma,
                          double tau, double mean_tol) {
    const auto& t = g.trunc();
    if (!(eigs.trunc().n_x == t.n_x)) throw DimensionError("diag_inverse: eigenvalue count does not match the field");
    const double scale = spectral::sobolev_norm(g, t.s0());
    const cplx avg = g.get(Multi{}, 0);
    if (std::abs(avg) > mean_tol * std::max(scale, 1e-300))
        throw PreconditionError("diag_inverse: right-hand side has nonzero average " + std::to_string(std::abs(avg)));

    FourierField out(t);
    for (std::size_t i = 0; i < g.size(); ++i) {
        if (g[i] == cplx(0)) continue;
        const Multi l = g.phi_of(i);
        const int j = g.j_of(i);
        const int ln = spectral::sup_norm(l, t.nu);
        if (ln == 0 && j == 0) continue;
        const cplx d = cplx(0, w.dot(l)) + eigs[j];
        const double bound = gamma * std::pow(std::max(1, std::abs(j)), 3) * std::pow(std::max(1, ln), -tau);
        if (std::abs(d) < bound) {
            std::ostringstream os;
            os << "diag_inverse: divisor at l = (";
            for (int k = 0; k < t.nu; ++k) os << (k ? ", " : "") << l[k];
            os << "), j = " << j << " is " << std::abs(d) << " < " << bound;
            throw SmallDivisorError(os.str());
        }
        out[i] = g[i] / d;
    }
    return out;
}

FourierField right_inverse(const regularize::Regularization& reg, const kam::Reduction& red, const FourierField& f,
                           double gamma, double tau) {
    const FourierField g = opalg::apply(red.Phi_inv, reg.phi1_inv(f));
    const FourierField v = diag_inverse(red.eigs, reg.freq, g, gamma, tau);
    return reg.phi2(opalg::apply(red.Phi, v));
}

}  // namespace qpkdv::solver
