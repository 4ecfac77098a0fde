#pragma once
// Dense Galerkin references for the linearized and nonlinear problems.

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "qpkdv/nonlin.hpp"

namespace oracle {

using qpkdv::spectral::cplx;
using qpkdv::spectral::FourierField;
using qpkdv::spectral::Frequency;
using qpkdv::spectral::Truncation;

inline Eigen::VectorXcd to_vector(const FourierField& u) {
    return Eigen::Map<const Eigen::VectorXcd>(u.coeffs().data(), static_cast<Eigen::Index>(u.size()));
}

inline FourierField from_vector(const Eigen::VectorXcd& v, const Truncation& t) {
    FourierField u(t);
    for (Eigen::Index i = 0; i < v.size(); ++i) u[static_cast<std::size_t>(i)] = v[i];
    return u;
}

// Columns L e_c from real test fields: e_c = (a - i b)/2 with a = e_c + e_p, b = i e_c - i e_p.
inline Eigen::MatrixXcd linear_matrix(const qpkdv::nonlin::LinearCoeffs& c, const Frequency& w,
                                      const Truncation& t) {
    FourierField probe(t);
    const auto M = static_cast<Eigen::Index>(t.size());
    Eigen::MatrixXcd L(M, M);
    for (std::size_t i = 0; i < t.size(); ++i) {
        const std::size_t p = probe.partner(i);
        if (p < i) continue;
        const auto l = probe.phi_of(i);
        const int j = probe.j_of(i);
        FourierField a(t), b(t);
        a.set_real_pair(l, j, 1.0);
        const Eigen::VectorXcd La = to_vector(qpkdv::nonlin::apply_linear(c, w, a));
        if (p == i) {
            L.col(static_cast<Eigen::Index>(i)) = La;
            continue;
        }
        b.set_real_pair(l, j, cplx(0, 1));
        const Eigen::VectorXcd Lb = to_vector(qpkdv::nonlin::apply_linear(c, w, b));
        L.col(static_cast<Eigen::Index>(i)) = 0.5 * (La - cplx(0, 1) * Lb);
        L.col(static_cast<Eigen::Index>(p)) = 0.5 * (La + cplx(0, 1) * Lb);
    }
    return L;
}

// Damped Newton on the truncated system F(u) = 0, holding the (0,0) coefficient at its initial value.
inline FourierField galerkin_newton(const qpkdv::nonlin::NonlinearitySpec& spec, const Frequency& w, FourierField u,
                                    double tol, int max_iter = 30) {
    const auto& t = u.trunc();
    const double s0 = t.s0();
    const auto centre = static_cast<Eigen::Index>(u.size() / 2);
    for (int it = 0; it < max_iter; ++it) {
        const FourierField F = qpkdv::nonlin::residual(spec, w, u);
        const double r = qpkdv::spectral::sobolev_norm(F, s0);
        if (r < tol) break;
        Eigen::MatrixXcd J = linear_matrix(qpkdv::nonlin::linearized_coefficients(spec, u), w, t);
        J.col(centre).setZero();
        Eigen::VectorXcd step = J.completeOrthogonalDecomposition().solve(-to_vector(F));
        step[centre] = 0;
        FourierField d = from_vector(step, t);
        d.make_real();
        double alpha = 1;
        for (int k = 0; k < 30; ++k, alpha *= 0.5) {
            FourierField trial = u + alpha * d;
            if (qpkdv::spectral::sobolev_norm(qpkdv::nonlin::residual(spec, w, trial), s0) < r) {
                u = trial;
                break;
            }
        }
    }
    return u;
}

}  // namespace oracle
