#include <cmath>
#include <numbers>

#include "qpkdv/dynamics.hpp"
#include "qpkdv/errors.hpp"

namespace qpkdv::dynamics {
namespace {

constexpr int kGridFactor = 4;

int grid_size(int n) { return std::max(64, kGridFactor * (2 * n + 1)); }

double grid_point(int m, int G) { return 2 * std::numbers::pi * m / G; }

cplx evaluate(const PhaseState& u, double x) {
    const int n = u.n_x();
    cplx acc{};
    for (int j = -n; j <= n; ++j) acc += u[j] * std::polar(1.0, j * x);
    return acc;
}

PhaseState analyze(const std::vector<cplx>& values, int n) {
    const int G = static_cast<int>(values.size());
    PhaseState out = PhaseState::zero(n);
    for (int j = -n; j <= n; ++j) {
        cplx acc{};
        for (int m = 0; m < G; ++m) acc += values[static_cast<std::size_t>(m)] * std::polar(1.0, -j * grid_point(m, G));
        out[j] = acc / static_cast<double>(G);
    }
    return out;
}

PhaseState derivative(const PhaseState& u) {
    PhaseState d = u;
    for (int j = -u.n_x(); j <= u.n_x(); ++j) d[j] = cplx(0, j) * u[j];
    return d;
}

PhaseState apply_block(const opalg::Block& M, const PhaseState& u) {
    if (M.rows() != static_cast<Eigen::Index>(u.h.size()))
        throw DimensionError("operator and phase state differ in n_x");
    const Eigen::VectorXcd x = Eigen::Map<const Eigen::VectorXcd>(u.h.data(), M.cols());
    const Eigen::VectorXcd y = M * x;
    PhaseState out = u;
    for (Eigen::Index i = 0; i < y.size(); ++i) out.h[static_cast<std::size_t>(i)] = y[i];
    return out;
}

}  // namespace

FrozenChain::FrozenChain(const regularize::Regularization& reg, const kam::Reduction& red) : reg_(reg), red_(red) {}

std::vector<double> FrozenChain::angles(double t) const {
    std::vector<double> phi(static_cast<std::size_t>(reg_.freq.nu()));
    for (int i = 0; i < reg_.freq.nu(); ++i) phi[static_cast<std::size_t>(i)] = reg_.freq.omega(i) * t;
    return phi;
}

double FrozenChain::reparam(double t) const {
    return t + slice(reg_.s2.alpha, angles(t).data())[0].real();
}

double FrozenChain::reparam_inverse(double tau) const {
    const FourierField rate = spectral::omega_dphi(reg_.s2.alpha, reg_.freq);
    double t = tau;
    for (int it = 0; it < 50; ++it) {
        const double f = reparam(t) - tau;
        if (std::abs(f) < 1e-14 * (1 + std::abs(tau))) return t;
        t -= f / (1 + slice(rate, angles(t).data())[0].real());
    }
    throw ConvergenceError("time reparametrization inverse did not converge at tau = " + std::to_string(tau));
}

PhaseState FrozenChain::apply_A(const PhaseState& h, const double* phi, bool inverse) const {
    const auto& s1 = reg_.s1;
    const PhaseState beta = slice(inverse ? s1.beta_tilde : s1.beta, phi);
    const PhaseState beta_x = derivative(beta);
    const int G = grid_size(h.n_x());
    std::vector<cplx> values(static_cast<std::size_t>(G));
    for (int m = 0; m < G; ++m) {
        const double x = grid_point(m, G);
        cplx v = evaluate(h, x + evaluate(beta, x).real());
        if (s1.symplectic) v *= 1 + evaluate(beta_x, x).real();
        values[static_cast<std::size_t>(m)] = v;
    }
    PhaseState out = analyze(values, h.n_x());
    out.t = h.t;
    return out;
}

// W = M T S Phi_inf
PhaseState FrozenChain::apply_W(const PhaseState& h, const double* phi, bool inverse) const {
    const PhaseState v = slice(reg_.s3.v, phi);
    const double p = slice(reg_.s4.p, phi)[0].real();
    const int n = h.n_x();
    const int G = grid_size(n);

    auto multiply = [&](const PhaseState& u, bool divide) {
        std::vector<cplx> values(static_cast<std::size_t>(G));
        for (int m = 0; m < G; ++m) {
            const double x = grid_point(m, G);
            const cplx f = evaluate(v, x);
            values[static_cast<std::size_t>(m)] = divide ? evaluate(u, x) / f : evaluate(u, x) * f;
        }
        return analyze(values, n);
    };
    auto translate = [&](PhaseState u, double shift) {
        for (int j = -n; j <= n; ++j) u[j] *= std::polar(1.0, j * shift);
        return u;
    };

    PhaseState out;
    if (!inverse) {
        out = apply_block(red_.Phi.at(phi), h);
        out = apply_block(reg_.s5.S.at(phi), out);
        out = multiply(translate(out, p), false);
    } else {
        out = translate(multiply(h, true), -p);
        out = apply_block(reg_.s5.S_inv.at(phi), out);
        out = apply_block(red_.Phi_inv.at(phi), out);
    }
    out.t = h.t;
    return out;
}

PhaseState FrozenChain::to_reduced(const PhaseState& h) const {
    const double tau = reparam(h.t);
    PhaseState y = apply_A(h, angles(h.t).data(), true);
    PhaseState v = apply_W(y, angles(tau).data(), true);
    v.t = tau;
    return v;
}

PhaseState FrozenChain::from_reduced(const PhaseState& v, double t) const {
    const double tau = reparam(t);
    PhaseState z = apply_W(v, angles(tau).data(), false);
    PhaseState h = apply_A(z, angles(t).data(), false);
    h.t = t;
    return h;
}

}  // namespace qpkdv::dynamics
