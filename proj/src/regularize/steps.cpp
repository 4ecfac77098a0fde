#include <cmath>
#include <sstream>

#include "qpkdv/regularize.hpp"

namespace qpkdv::regularize {

using opalg::DiagonalOperator;
using spectral::ComposeKind;
using spectral::cplx;
using spectral::dx_pow;
using spectral::Grid;
using spectral::omega_dphi;
using spectral::pointwise;
using spectral::x_average;

namespace {

using Vals = std::span<const double>;

FourierField constant_like(const FourierField& f, double c) { return FourierField::constant(f.trunc(), c); }

double grid_max(const FourierField& f) {
    const auto v = spectral::synthesize(f, spectral::grid_for(f.trunc()));
    double m = 0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

ToplitzOperator dx_inverse_op(const spectral::Truncation& t) {
    return opalg::from_multiplier([](int j) { return j == 0 ? cplx(0) : cplx(0, -1.0 / j); }, t);
}

}  // namespace

VarCoeffs from_linearization(const nonlin::LinearCoeffs& a) {
    return {constant_like(a.a3, 1.0) + a.a3, a.a2, a.a1, a.a0};
}

FourierField apply_operator(const VarCoeffs& L, const Frequency& w, const FourierField& h) {
    const FourierField d1 = dx_pow(h, 1), d2 = dx_pow(h, 2), d3 = dx_pow(h, 3);
    const FourierField* in[] = {&L.top, &L.c2, &L.c1, &L.c0, &d3, &d2, &d1, &h};
    return omega_dphi(h, w) +
           pointwise(in, [](Vals v) { return v[0] * v[4] + v[1] * v[5] + v[2] * v[6] + v[3] * v[7]; },
                     h.trunc());
}

VarCoeffs conjugate_by_multiplication(const VarCoeffs& L, const FourierField& g, const Frequency& w) {
    const FourierField g1 = dx_pow(g, 1), g2 = dx_pow(g, 2), g3 = dx_pow(g, 3), gt = omega_dphi(g, w);
    const auto& t = L.top.trunc();
    VarCoeffs out;
    out.top = L.top;
    {
        const FourierField* in[] = {&L.c2, &L.top, &g1, &g};
        out.c2 = pointwise(in, [](Vals v) { return v[0] + 3 * v[1] * v[2] / v[3]; }, t);
    }
    {
        const FourierField* in[] = {&L.c1, &L.top, &g2, &L.c2, &g1, &g};
        out.c1 = pointwise(in, [](Vals v) { return v[0] + (3 * v[1] * v[2] + 2 * v[3] * v[4]) / v[5]; }, t);
    }
    {
        const FourierField* in[] = {&L.c0, &gt, &L.top, &g3, &L.c2, &g2, &L.c1, &g1, &g};
        out.c0 = pointwise(
            in, [](Vals v) { return v[0] + (v[1] + v[2] * v[3] + v[4] * v[5] + v[6] * v[7]) / v[8]; }, t);
    }
    return out;
}

std::string to_string(Mode m) {
    switch (m) {
        case Mode::generic_Q: return "generic_Q";
        case Mode::fully_nonlinear_F: return "fully_nonlinear_F";
        case Mode::hamiltonian: return "hamiltonian";
    }
    return "generic_Q";
}

Step1 step1_space_diffeo(const VarCoeffs& L, const Frequency& w, bool symplectic) {
    const auto& t = L.top.trunc();
    const auto topv = spectral::synthesize(L.top, spectral::grid_for(t));
    for (double v : topv)
        if (v <= 0.5) throw DomainError("step 1: degenerate leading coefficient, 1 + a3 = " + std::to_string(v));

    Step1 s;
    s.symplectic = symplectic;
    const FourierField* top_in[] = {&L.top};
    const auto q = pointwise(top_in, [](Vals v) { return std::pow(v[0], -1.0 / 3.0); }, t);
    const auto qm = x_average(q);
    const FourierField* qm_in[] = {&qm};
    s.b = pointwise(qm_in, [](Vals v) { return std::pow(v[0], -3.0); }, t);
    const FourierField* rho_in[] = {&s.b, &q};
    const auto rho0 = pointwise(rho_in, [](Vals v) { return std::cbrt(v[0]) * v[1] - 1.0; }, t);
    s.beta = dx_pow(rho0, -1);
    s.beta_tilde = spectral::invert_torus_diffeo(ComposeKind::space, s.beta, w);

    const FourierField bx = dx_pow(s.beta, 1), bxx = dx_pow(s.beta, 2), bxxx = dx_pow(s.beta, 3);
    const VarCoeffs src = symplectic ? conjugate_by_multiplication(L, constant_like(bx, 1.0) + bx, w) : L;

    {
        const FourierField* in[] = {&src.top, &bx, &s.b};
        const auto r = pointwise(in, [](Vals v) { return v[0] * std::pow(1 + v[1], 3) - v[2]; }, t);
        s.identity_residual = grid_max(r) / grid_max(s.b);
    }
    FourierField B2, B1;
    {
        const FourierField* in[] = {&src.top, &bx, &bxx, &src.c2};
        B2 = pointwise(in, [](Vals v) { return 3 * v[0] * (1 + v[1]) * v[2] + v[3] * (1 + v[1]) * (1 + v[1]); }, t);
    }
    {
        const FourierField* in[] = {&src.top, &bxxx, &src.c2, &bxx, &src.c1, &bx};
        B1 = omega_dphi(s.beta, w) +
             pointwise(in, [](Vals v) { return v[0] * v[1] + v[2] * v[3] + v[4] * (1 + v[5]); }, t);
    }
    s.out.top = s.b;
    s.out.c2 = spectral::compose(ComposeKind::space, B2, s.beta_tilde, w);
    s.out.c1 = spectral::compose(ComposeKind::space, B1, s.beta_tilde, w);
    s.out.c0 = spectral::compose(ComposeKind::space, src.c0, s.beta_tilde, w);
    return s;
}

Step2 step2_time_reparam(const VarCoeffs& L1, const Frequency& w) {
    Step2 s;
    const FourierField& b3 = L1.top;
    s.m3 = b3.mean().real();
    const FourierField dev = b3 - constant_like(b3, s.m3);
    s.alpha = (1.0 / s.m3) * spectral::omega_dphi_inv(dev, w);
    const FourierField da = omega_dphi(s.alpha, w);
    if (grid_max(da) > 0.5) throw DiffeoError("step 2: |omega.d alpha| exceeds 1/2");
    s.identity_residual = (b3 - s.m3 * (constant_like(da, 1.0) + da)).max_abs();
    s.alpha_tilde = spectral::invert_torus_diffeo(ComposeKind::time, s.alpha, w);
    auto Binv = [&](const FourierField& h) { return spectral::compose(ComposeKind::time, h, s.alpha_tilde, w); };
    s.rho = Binv(constant_like(da, 1.0) + da);
    s.out.top = constant_like(b3, s.m3);
    s.out.c2 = spectral::divide(Binv(L1.c2), s.rho);
    s.out.c1 = spectral::divide(Binv(L1.c1), s.rho);
    s.out.c0 = spectral::divide(Binv(L1.c0), s.rho);
    return s;
}

Step3 step3_descent_zero(const VarCoeffs& L2, double m3, const Frequency& w, double mean_tol) {
    Step3 s;
    const auto& t = L2.c2.trunc();
    const auto avg = x_average(L2.c2);
    const Grid g = spectral::grid_for(t);
    const auto vals = spectral::synthesize(avg, g);
    std::size_t worst = 0;
    for (std::size_t p = 0; p < vals.size(); ++p)
        if (std::abs(vals[p]) > std::abs(vals[worst])) worst = p;
    s.max_c2_mean = std::abs(vals[worst]);
    if (s.max_c2_mean > mean_tol) {
        std::vector<double> th(t.nu);
        g.phi_coords(worst / g.m_x, th.data());
        std::ostringstream os;
        os << "step 3: x-mean of the d_xx coefficient is " << vals[worst] << " at theta = (";
        for (int d = 0; d < t.nu; ++d) os << (d ? ", " : "") << th[d];
        os << "); hypothesis (Q)/(F) fails";
        throw PreconditionError(os.str());
    }
    s.v = spectral::exp_field((-1.0 / (3 * m3)) * dx_pow(L2.c2, -1));
    s.out = conjugate_by_multiplication(L2, s.v, w);
    s.t2_residual = sobolev_norm(s.out.c2, t.s0());
    s.out.c2 = FourierField(t);
    return s;
}

Step4 step4_translation(const VarCoeffs& L3, const Frequency& w) {
    Step4 s;
    const auto& t = L3.c1.trunc();
    s.m1 = L3.c1.mean().real();
    const FourierField V = constant_like(L3.c1, s.m1) - x_average(L3.c1);
    s.p = spectral::omega_dphi_inv(V, w);
    const FourierField back = -s.p;
    s.out.top = L3.top;
    s.out.c2 = FourierField(t);
    s.out.c1 = omega_dphi(s.p, w) + spectral::compose(ComposeKind::space, L3.c1, back, w);
    s.out.c0 = spectral::compose(ComposeKind::space, L3.c0, back, w);
    s.average_defect = (x_average(s.out.c1) - constant_like(s.p, s.m1)).max_abs();
    return s;
}

Step5 step5_pseudo_diff(const VarCoeffs& L4, double m3, double m1, const Frequency& w, bool hamiltonian) {
    Step5 s;
    const auto& t = L4.c1.trunc();
    const FourierField& e1 = L4.c1;
    const FourierField& e0 = L4.c0;
    s.w = (1.0 / (3 * m3)) * dx_pow(constant_like(e1, m1) - e1, -1);
    const FourierField wx = dx_pow(s.w, 1), wxx = dx_pow(s.w, 2), wxxx = dx_pow(s.w, 3);
    s.r1_residual = (3 * m3 * wx + e1 - constant_like(e1, m1)).max_abs();

    const auto I = ToplitzOperator::identity(t);
    const auto Dinv = dx_inverse_op(t);
    const auto Pi0 = opalg::from_multiplier([](int j) { return cplx(j == 0 ? 0.0 : 1.0); }, t);
    const auto Mw = opalg::from_multiplication(s.w);

    if (!hamiltonian) {
        const auto Psi = opalg::compose(Mw, Dinv);
        s.S = I + Psi;
        s.S_inv = opalg::neumann_inverse(Psi);
        const FourierField e1w = spectral::multiply(e1, s.w);
        const FourierField q0 = 3 * m3 * wxx + e1w - m1 * s.w;
        const FourierField rm1 = omega_dphi(s.w, w) + m3 * wxxx + spectral::multiply(e1, wx) +
                                 spectral::multiply(e0, s.w);
        const auto r = opalg::from_multiplication(e0) + opalg::compose(opalg::from_multiplication(q0), Pi0) +
                       opalg::compose(opalg::from_multiplication(rm1), Dinv);
        s.R = opalg::compose(s.S_inv, r);
        return s;
    }

    const auto G = opalg::compose(Pi0, opalg::compose(Mw, Dinv));
    s.S = opalg::matrix_exponential(G);
    s.S_inv = opalg::matrix_exponential(cplx(-1) * G);
    DiagonalOperator D0(t);
    for (int j = -t.n_x; j <= t.n_x; ++j) D0[j] = cplx(0, -m3 * j * j * j + m1 * j);
    const auto D1 = opalg::from_multiplier([](int j) { return cplx(0, j); }, t);
    const auto P = opalg::compose(opalg::from_multiplication(e1 - constant_like(e1, m1)), D1) +
                   opalg::from_multiplication(e0);
    // L4 S - S L0 = [L0, S - I] + P S
    const auto K = opalg::diagonal_commutator(s.S - I, w, D0) + opalg::compose(P, s.S);
    s.R = opalg::compose(s.S_inv, K);
    return s;
}

}  // namespace qpkdv::regularize
