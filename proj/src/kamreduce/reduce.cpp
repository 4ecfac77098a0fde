#include <cmath>
#include <iomanip>
#include <sstream>

#include "qpkdv/kamreduce.hpp"

namespace qpkdv::kam {

using spectral::cplx;

namespace {

double sup_shift(const DiagonalOperator& D, const DiagonalOperator& D0) {
    double m = 0;
    for (std::size_t i = 0; i < D.values().size(); ++i) m = std::max(m, std::abs(D.values()[i] - D0.values()[i]));
    return m;
}

DiagonalOperator plus(const DiagonalOperator& a, const DiagonalOperator& b) {
    DiagonalOperator out = a;
    const int n = a.trunc().n_x;
    for (int j = -n; j <= n; ++j) out[j] += b[j];
    return out;
}

StepTrace measure(const ReducibilityState& s) {
    const double s0 = s.R.trunc().s0();
    StepTrace tr;
    tr.step = s.step;
    tr.r_s0 = opalg::decay_norm(s.R, s0);
    tr.r_s2 = opalg::decay_norm(s.R, s0 + 2);
    tr.sup_r = sup_shift(s.D, s.D0);
    tr.mask_fraction = s.mask ? 1.0 : 0.0;
    return tr;
}

}  // namespace

ReducibilityState initial_state(const DiagonalOperator& D0, const ToplitzOperator& R0, const Schedule& sched,
                                bool exponential) {
    if (!(D0.trunc() == R0.trunc())) throw DimensionError("reduce: truncation mismatch between D0 and R0");
    ReducibilityState s;
    s.D0 = D0;
    s.D = D0;
    s.R = R0;
    s.Phi = ToplitzOperator::identity(R0.trunc());
    s.Phi_inv = s.Phi;
    s.schedule = sched;
    s.exponential = exponential;
    return s;
}

ReducibilityState kam_step(const ReducibilityState& s, const Frequency& w, StepTrace* trace) {
    const auto& t = s.R.trunc();
    const double s0 = t.s0();
    const auto& sch = s.schedule;
    const int N = sch.cutoff(s.step, 2 * t.n_phi);

    ReducibilityState out = s;
    const Homological h = solve_homological(s.D, s.R, w, N, sch.gamma, sch.tau);
    if (!h.ok) {
        out.mask = false;
        out.violation = h.violation;
        if (trace) {
            *trace = measure(out);
            trace->N = N;
        }
        return out;
    }
    const double psi = opalg::decay_norm(h.Psi, s0);
    if (psi >= 0.5)
        throw ContractionError("KAM step " + std::to_string(s.step) + ": |Psi|_{s0} = " + std::to_string(psi));

    const auto I = ToplitzOperator::identity(t);
    const auto avg = opalg::to_toplitz(h.diag_part);
    ToplitzOperator Phi, Phi_inv, Rn;
    if (s.exponential) {
        Phi = opalg::matrix_exponential(h.Psi);
        Phi_inv = opalg::matrix_exponential(cplx(-1) * h.Psi);
        Rn = opalg::compose(Phi_inv, opalg::diagonal_commutator(Phi - I, w, s.D) + opalg::compose(s.R, Phi)) - avg;
    } else {
        Phi = I + h.Psi;
        Phi_inv = opalg::neumann_inverse(h.Psi);
        Rn = opalg::compose(Phi_inv, project_offsets(s.R, N, false) + opalg::compose(s.R, h.Psi) -
                                         opalg::compose(h.Psi, avg));
    }
    Rn.prune();

    out.step = s.step + 1;
    out.D = plus(s.D, h.diag_part);
    out.R = std::move(Rn);
    out.Phi = opalg::compose(s.Phi, Phi);
    out.Phi_inv = opalg::compose(Phi_inv, s.Phi_inv);
    if (trace) {
        *trace = measure(out);
        trace->N = N;
        trace->psi_s0 = psi;
    }
    return out;
}

Reduction reduce(const DiagonalOperator& D0, const ToplitzOperator& R0, const Frequency& w, const Schedule& sched,
                 bool exponential) {
    ReducibilityState s = initial_state(D0, R0, sched, exponential);
    const double s0 = R0.trunc().s0();
    Reduction red;
    red.unperturbed = D0;
    red.trace.push_back(measure(s));
    double r = red.trace.back().r_s0;
    int stalled = 0;
    while (r >= sched.target_decay && s.step < sched.max_steps) {
        StepTrace tr;
        ReducibilityState next = kam_step(s, w, &tr);
        if (!next.mask) {
            red.excluded = true;
            red.violation = next.violation;
            tr.mask_fraction = 0;
            red.trace.push_back(tr);
            break;
        }
        red.trace.push_back(tr);
        stalled = tr.r_s0 >= r ? stalled + 1 : 0;
        if (stalled >= 3)
            throw ConvergenceError("reduce: |R|_{s0} failed to decrease for 3 consecutive steps (now " +
                                   std::to_string(tr.r_s0) + ")");
        r = tr.r_s0;
        s = std::move(next);
    }
    red.eigs = s.D;
    red.Phi = std::move(s.Phi);
    red.Phi_inv = std::move(s.Phi_inv);
    red.final_decay = opalg::decay_norm(s.R, s0);
    red.converged = !red.excluded && red.final_decay < sched.target_decay;
    red.sup_r = sup_shift(red.eigs, D0);
    return red;
}

Reduction reduce(const regularize::Regularization& reg, const Frequency& w, const Schedule& sched) {
    const auto D0 = unperturbed_eigenvalues(reg.R.trunc(), reg.m3, reg.m1);
    return reduce(D0, reg.R, w, sched, reg.mode == regularize::Mode::hamiltonian);
}

double conjugation_residual(const regularize::Regularization& reg, const Reduction& red, const FourierField& z) {
    const double s0 = z.trunc().s0();
    const FourierField lhs = reg.apply_L5(opalg::apply(red.Phi, z));
    const FourierField rhs = opalg::apply(red.Phi, spectral::omega_dphi(z, reg.freq) + opalg::apply(red.eigs, z));
    return spectral::sobolev_norm(lhs - rhs, s0) / spectral::sobolev_norm(z, s0 + 3);
}

EigenvalueReport eigenvalue_report(const DiagonalOperator& eigs, double m3, double m1, double epsilon) {
    const auto D0 = unperturbed_eigenvalues(eigs.trunc(), m3, m1);
    EigenvalueReport rep;
    rep.sup_r = sup_shift(eigs, D0);
    const int n = eigs.trunc().n_x;
    for (int j = -n; j <= n; ++j) {
        rep.max_re = std::max(rep.max_re, std::abs(eigs[j].real()));
        rep.antisymmetry = std::max(rep.antisymmetry, std::abs(eigs[j] + eigs[-j]));
    }
    rep.mu0 = std::abs(eigs[0]);
    rep.conjugacy = eigs.conjugacy_defect();
    rep.sup_r_over_eps = epsilon == 0 ? 0 : rep.sup_r / std::abs(epsilon);
    return rep;
}

std::string trace_csv(const std::vector<StepTrace>& trace) {
    std::ostringstream os;
    os << "step,N,R_s0,R_s0_plus_2,sup_r,mask_fraction\n" << std::setprecision(17);
    for (const auto& t : trace)
        os << t.step << ',' << t.N << ',' << t.r_s0 << ',' << t.r_s2 << ',' << t.sup_r << ',' << t.mask_fraction
           << '\n';
    return os.str();
}

}  // namespace qpkdv::kam
