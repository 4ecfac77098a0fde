#include <cmath>

#include "qpkdv/dynamics.hpp"
#include "qpkdv/errors.hpp"

namespace qpkdv::dynamics {

PhaseState PhaseState::zero(int n_x, double t) {
    PhaseState s;
    s.h.assign(static_cast<std::size_t>(2 * n_x + 1), cplx{});
    s.t = t;
    return s;
}

double hs_norm(const PhaseState& u, double s) {
    const int n = u.n_x();
    double acc = 0;
    for (int j = -n; j <= n; ++j) acc += std::pow(std::max(1, std::abs(j)), 2 * s) * std::norm(u[j]);
    return std::sqrt(acc);
}

double reality_defect(const PhaseState& u) {
    const int n = u.n_x();
    double d = 0;
    for (int j = 0; j <= n; ++j) d = std::max(d, std::abs(u[j] - std::conj(u[-j])));
    return d;
}

PhaseState operator-(const PhaseState& a, const PhaseState& b) {
    if (a.h.size() != b.h.size()) throw DimensionError("phase states differ in n_x");
    PhaseState out = a;
    for (std::size_t i = 0; i < out.h.size(); ++i) out.h[i] -= b.h[i];
    return out;
}

PhaseState random_state(int n_x, std::mt19937_64& rng, double amplitude, double decay) {
    std::normal_distribution<double> g(0.0, 1.0);
    PhaseState s = PhaseState::zero(n_x);
    for (int j = 1; j <= n_x; ++j) {
        const cplx c = amplitude * std::pow(j, -decay) * cplx(g(rng), g(rng));
        s[j] = c;
        s[-j] = std::conj(c);
    }
    return s;
}

PhaseState reduced_flow(const DiagonalOperator& eigs, const PhaseState& v0, double t) {
    const int n = v0.n_x();
    if (eigs.values().size() != v0.h.size()) throw DimensionError("eigenvalues and state differ in n_x");
    PhaseState v = v0;
    for (int j = -n; j <= n; ++j) v[j] = std::exp(-eigs[j] * t) * v0[j];
    v.t = v0.t + t;
    return v;
}

PhaseState slice(const FourierField& f, const double* phi) {
    const auto& tr = f.trunc();
    PhaseState out = PhaseState::zero(tr.n_x);
    for (std::size_t i = 0; i < f.size(); ++i) {
        if (f[i] == cplx{}) continue;
        const auto l = f.phi_of(i);
        double arg = 0;
        for (int k = 0; k < tr.nu; ++k) arg += l[static_cast<std::size_t>(k)] * phi[k];
        out[f.j_of(i)] += f[i] * std::polar(1.0, arg);
    }
    return out;
}

}  // namespace qpkdv::dynamics
