#include <cmath>

#include "qpkdv/regularize.hpp"

namespace qpkdv::regularize {

using spectral::ComposeKind;
using spectral::dx_pow;

namespace {
FourierField one_plus(const FourierField& f) { return FourierField::constant(f.trunc(), 1.0) + f; }
}  // namespace

FourierField Regularization::A(const FourierField& h) const {
    FourierField out = spectral::compose(ComposeKind::space, h, s1.beta, freq);
    if (s1.symplectic) out = spectral::multiply(one_plus(dx_pow(s1.beta, 1)), out);
    return out;
}

FourierField Regularization::A_inv(const FourierField& h) const {
    FourierField out = spectral::compose(ComposeKind::space, h, s1.beta_tilde, freq);
    if (s1.symplectic) out = spectral::multiply(one_plus(dx_pow(s1.beta_tilde, 1)), out);
    return out;
}

FourierField Regularization::B(const FourierField& h) const {
    return spectral::compose(ComposeKind::time, h, s2.alpha, freq);
}

FourierField Regularization::B_inv(const FourierField& h) const {
    return spectral::compose(ComposeKind::time, h, s2.alpha_tilde, freq);
}

FourierField Regularization::M(const FourierField& h) const { return spectral::multiply(s3.v, h); }
FourierField Regularization::M_inv(const FourierField& h) const { return spectral::divide(h, s3.v); }

FourierField Regularization::T(const FourierField& h) const {
    return spectral::compose(ComposeKind::space, h, s4.p, freq);
}

FourierField Regularization::T_inv(const FourierField& h) const {
    return spectral::compose(ComposeKind::space, h, -s4.p, freq);
}

FourierField Regularization::S(const FourierField& h) const { return opalg::apply(s5.S, h); }
FourierField Regularization::S_inv(const FourierField& h) const { return opalg::apply(s5.S_inv, h); }

FourierField Regularization::phi1(const FourierField& h) const {
    return A(B(spectral::multiply(s2.rho, M(T(S(h))))));
}

FourierField Regularization::phi1_inv(const FourierField& h) const {
    return S_inv(T_inv(M_inv(spectral::divide(B_inv(A_inv(h)), s2.rho))));
}

FourierField Regularization::phi2(const FourierField& h) const { return A(B(M(T(S(h))))); }

FourierField Regularization::phi2_inv(const FourierField& h) const {
    return S_inv(T_inv(M_inv(B_inv(A_inv(h)))));
}

FourierField Regularization::apply_L5(const FourierField& z) const {
    return spectral::omega_dphi(z, freq) + m3 * dx_pow(z, 3) + m1 * dx_pow(z, 1) + opalg::apply(R, z);
}

Mode select_mode(const nonlin::StructureFlags& flags) {
    if (flags.hamiltonian) return Mode::hamiltonian;
    if (flags.cond_F) return Mode::fully_nonlinear_F;
    if (flags.cond_Q) return Mode::generic_Q;
    throw PreconditionError("nonlinearity satisfies neither (F), (Q) nor the Hamiltonian form: " +
                            flags.diagnostic);
}

Regularization run_regularization(const nonlin::NonlinearitySpec& spec, const nonlin::StructureFlags& flags,
                                  const Frequency& w, const FourierField& u, const RegularizeOptions& opt) {
    const Mode mode = select_mode(flags);
    return run_regularization(from_linearization(nonlin::linearized_coefficients(spec, u)), mode, w, opt);
}

Regularization run_regularization(const VarCoeffs& L, Mode mode, const Frequency& w,
                                  const RegularizeOptions& opt) {
    Regularization reg(w);
    reg.mode = mode;
    const bool ham = mode == Mode::hamiltonian;
    const auto& t = L.top.trunc();
    const double s0 = t.s0();
    auto norm = [&](const FourierField& f) { return spectral::sobolev_norm(f, s0); };
    auto step = [&](const char* what, auto&& fn) {
        try {
            return fn();
        } catch (const Error&) {
            rethrow_with_context(what);
        }
    };

    reg.s1 = step("step 1", [&] { return step1_space_diffeo(L, w, ham); });
    reg.reports.push_back({"space_diffeo", reg.s1.identity_residual,
                           {{"beta", norm(reg.s1.beta)}, {"b-1", norm(reg.s1.b - one_plus(FourierField(t)))},
                            {"b2", norm(reg.s1.out.c2)}, {"b1", norm(reg.s1.out.c1)}, {"b0", norm(reg.s1.out.c0)}}});

    reg.s2 = step("step 2", [&] { return step2_time_reparam(reg.s1.out, w); });
    reg.m3 = reg.s2.m3;
    reg.reports.push_back({"time_reparam", reg.s2.identity_residual,
                           {{"m3", reg.m3}, {"alpha", norm(reg.s2.alpha)}, {"rho-1", norm(reg.s2.rho - one_plus(FourierField(t)))},
                            {"c2", norm(reg.s2.out.c2)}, {"c1", norm(reg.s2.out.c1)}, {"c0", norm(reg.s2.out.c0)}}});

    if (ham) {
        reg.step3_skipped = true;
        reg.s3.v = one_plus(FourierField(t));
        reg.s3.t2_residual = norm(reg.s2.out.c2);
        reg.s3.out = reg.s2.out;
        reg.s3.out.c2 = FourierField(t);
    } else {
        reg.s3 = step("step 3", [&] { return step3_descent_zero(reg.s2.out, reg.m3, w, opt.mean_tol); });
    }
    reg.reports.push_back({"descent_zero", reg.s3.t2_residual,
                           {{"v-1", norm(reg.s3.v - one_plus(FourierField(t)))}, {"c2_mean", reg.s3.max_c2_mean},
                            {"d1", norm(reg.s3.out.c1)}, {"d0", norm(reg.s3.out.c0)}}});

    reg.s4 = step("step 4", [&] { return step4_translation(reg.s3.out, w); });
    reg.m1 = reg.s4.m1;
    reg.reports.push_back({"translation", reg.s4.average_defect,
                           {{"m1", reg.m1}, {"p", norm(reg.s4.p)}, {"e1", norm(reg.s4.out.c1)}, {"e0", norm(reg.s4.out.c0)}}});

    reg.s5 = step("step 5", [&] { return step5_pseudo_diff(reg.s4.out, reg.m3, reg.m1, w, ham); });
    reg.R = reg.s5.R;
    reg.reports.push_back({"pseudo_diff", reg.s5.r1_residual,
                           {{"w", norm(reg.s5.w)}, {"R_decay_s0", opalg::decay_norm(reg.R, s0)}}});
    return reg;
}

double conjugacy_residual(const Regularization& reg, const VarCoeffs& L, const FourierField& z) {
    const double s0 = z.trunc().s0();
    const FourierField lhs = apply_operator(L, reg.freq, reg.phi2(z));
    const FourierField rhs = reg.phi1(reg.apply_L5(z));
    return spectral::sobolev_norm(lhs - rhs, s0) / spectral::sobolev_norm(z, s0 + 3);
}

}  // namespace qpkdv::regularize
