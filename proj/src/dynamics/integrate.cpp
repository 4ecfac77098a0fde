#include <cmath>

#include "qpkdv/dynamics.hpp"
#include "qpkdv/errors.hpp"

namespace qpkdv::dynamics {
namespace {

// (a g)_j for |j| <= n_x of g
void accumulate_product(const PhaseState& a, const std::vector<cplx>& g, int n, std::vector<cplx>& out) {
    const int na = a.n_x();
    for (int j = -n; j <= n; ++j) {
        cplx acc{};
        const int lo = std::max(-n, j - na), hi = std::min(n, j + na);
        for (int k = lo; k <= hi; ++k) acc += a[j - k] * g[static_cast<std::size_t>(k + n)];
        out[static_cast<std::size_t>(j + n)] += acc;
    }
}

class LinearField {
public:
    LinearField(const nonlin::LinearCoeffs& a, const Frequency& w) : a_(a), w_(w) {}

    // -(a3 h_xxx + a2 h_xx + a1 h_x + a0 h) with coefficients at phi = omega t
    std::vector<cplx> operator()(double t, const std::vector<cplx>& h) const {
        const int n = static_cast<int>(h.size() / 2);
        std::vector<double> phi(static_cast<std::size_t>(w_.nu()));
        for (int i = 0; i < w_.nu(); ++i) phi[static_cast<std::size_t>(i)] = w_.omega(i) * t;
        // indexed by derivative order
        const PhaseState coeffs[] = {slice(a_.a0, phi.data()), slice(a_.a1, phi.data()), slice(a_.a2, phi.data()),
                                     slice(a_.a3, phi.data())};

        std::vector<cplx> out(h.size()), deriv(h.size());
        for (int order = 0; order <= 3; ++order) {
            for (int j = -n; j <= n; ++j)
                deriv[static_cast<std::size_t>(j + n)] =
                    std::pow(cplx(0, j), order) * h[static_cast<std::size_t>(j + n)];
            accumulate_product(coeffs[order], deriv, n, out);
        }
        for (auto& c : out) c = -c;
        return out;
    }

private:
    const nonlin::LinearCoeffs& a_;
    const Frequency& w_;
};

}  // namespace

std::vector<PhaseState> integrate_linear(const nonlin::LinearCoeffs& a, const Frequency& w, const PhaseState& h0,
                                         double T, const IntegrateOptions& opt) {
    if (!(opt.dt > 0) || !(T >= 0)) throw DomainError("integrate_linear needs dt > 0 and T >= 0");
    const int n = h0.n_x();
    const long steps = std::max(1L, std::lround(std::ceil(T / opt.dt - 1e-9)));
    const double dt = T / static_cast<double>(steps);
    const long per_sample = std::max(1L, std::lround(opt.sample_dt / std::max(dt, 1e-300)));
    const double norm0 = std::max(hs_norm(h0, 0), 1e-300);

    // Half-step integrating factor for h_t = i j^3 h.
    std::vector<cplx> E(h0.h.size()), E2(h0.h.size());
    for (int j = -n; j <= n; ++j) {
        const double jj = static_cast<double>(j) * j * j;
        E[static_cast<std::size_t>(j + n)] = std::polar(1.0, jj * dt / 2);
        E2[static_cast<std::size_t>(j + n)] = std::polar(1.0, jj * dt);
    }
    const LinearField N(a, w);
    const std::size_t m = h0.h.size();
    auto combine = [m](const std::vector<cplx>& f, const std::vector<cplx>& x, double c,
                       const std::vector<cplx>& y) {
        std::vector<cplx> r(m);
        for (std::size_t i = 0; i < m; ++i) r[i] = f[i] * (x[i] + c * y[i]);
        return r;
    };

    std::vector<PhaseState> samples{h0};
    std::vector<cplx> h = h0.h;
    for (long step = 1; step <= steps; ++step) {
        if (T == 0) break;
        const double t = h0.t + static_cast<double>(step - 1) * dt;
        const auto k1 = N(t, h);
        const auto k2 = N(t + dt / 2, combine(E, h, dt / 2, k1));
        std::vector<cplx> Eh(m), E2h(m), Ek3(m);
        for (std::size_t i = 0; i < m; ++i) Eh[i] = E[i] * h[i];
        const auto k3 = N(t + dt / 2, [&] {
            std::vector<cplx> r(m);
            for (std::size_t i = 0; i < m; ++i) r[i] = Eh[i] + dt / 2 * k2[i];
            return r;
        }());
        for (std::size_t i = 0; i < m; ++i) {
            E2h[i] = E2[i] * h[i];
            Ek3[i] = E[i] * k3[i];
        }
        const auto k4 = N(t + dt, [&] {
            std::vector<cplx> r(m);
            for (std::size_t i = 0; i < m; ++i) r[i] = E2h[i] + dt * Ek3[i];
            return r;
        }());
        for (std::size_t i = 0; i < m; ++i)
            h[i] = E2h[i] + dt / 6 * (E2[i] * k1[i] + 2.0 * E[i] * (k2[i] + k3[i]) + k4[i]);

        PhaseState cur{h, h0.t + static_cast<double>(step) * dt};
        const double growth = hs_norm(cur, 0) / norm0;
        if (!std::isfinite(growth) || growth > opt.blowup)
            throw ConvergenceError("linear flow unstable: norm grew by " + std::to_string(growth) + " at t = " +
                                   std::to_string(cur.t));
        if (step % per_sample == 0 || step == steps) samples.push_back(std::move(cur));
    }
    return samples;
}

}  // namespace qpkdv::dynamics
