#include <cmath>

#include "qpkdv/solver.hpp"

namespace qpkdv::solver {

std::vector<double> SolveReport::residuals() const {
    std::vector<double> r;
    for (const auto& it : iterates) r.push_back(it.residual);
    return r;
}

double order_estimate(const std::vector<double>& r) {
    const std::size_t n = r.size();
    if (n < 3) return 0;
    const double num = std::log(r[n - 1] / r[n - 2]);
    const double den = std::log(r[n - 2] / r[n - 3]);
    return den == 0 ? 0 : num / den;
}

SolveReport nash_moser(const nonlin::NonlinearitySpec& spec, const nonlin::StructureFlags& flags, const Frequency& w,
                       const Truncation& t, const NashMoserConfig& cfg) {
    if (!flags.reversible && !flags.total_derivative)
        throw PreconditionError(
            "nash_moser: f is neither reversible nor a total x-derivative; a nonzero space average m of f "
            "forces eps m = 0 on the average of the equation");
    const auto mode = regularize::select_mode(flags);
    const double s0 = t.s0();
    const double gamma = cfg.kam.gamma, tau = cfg.kam.tau;

    SolveReport rep;
    rep.lambda = w.lambda();
    rep.epsilon = spec.epsilon;
    rep.eigs = kam::unperturbed_eigenvalues(t, 1, 0);
    FourierField u(t);
    const double f0 = spectral::sobolev_norm(nonlin::residual(spec, w, u), s0);
    rep.tol_res = cfg.tol_res < 0 ? 1e-10 * (1 + f0) : cfg.tol_res;

    int grew = 0;
    for (int n = 0;; ++n) {
        const FourierField F = nonlin::residual(spec, w, u);
        const double r = spectral::sobolev_norm(F, s0);
        const double gn = gamma * (1 + std::ldexp(1.0, -n));
        const int Nn = static_cast<int>(std::round(std::pow(cfg.N0, std::pow(cfg.chi, n + 1))));
        rep.iterates.push_back({n, spectral::sobolev_norm(u, s0), r, Nn, gn});
        if (r < rep.tol_res) {
            rep.converged = true;
            break;
        }
        if (n > 0) {
            grew = r > rep.iterates[n - 1].residual ? grew + 1 : 0;
            if (grew >= 2) throw ConvergenceError("nash_moser: residual grew on two consecutive iterations");
        }
        if (n >= cfg.max_iters) break;

        const auto reg = regularize::run_regularization(
            regularize::from_linearization(nonlin::linearized_coefficients(spec, u)), mode, w, cfg.regularize);
        kam::Schedule sched = cfg.kam;
        sched.gamma = gn;
        const auto red = kam::reduce(reg, w, sched);
        rep.m3 = reg.m3;
        rep.m1 = reg.m1;
        rep.eigs = red.eigs;
        if (red.excluded) {
            rep.excluded_lambda = true;
            rep.exclusion = red.violation ? red.violation->describe(t.nu) : "second-order Melnikov condition";
            break;
        }
        FourierField h;
        try {
            h = right_inverse(reg, red, spectral::ball_project(F, Nn), gn, tau);
        } catch (const SmallDivisorError& e) {
            rep.excluded_lambda = true;
            rep.exclusion = e.what();
            break;
        }
        u -= spectral::ball_project(h, Nn);
        if (flags.reversible) spectral::project_X(u);
        u.make_real();
    }
    rep.solution = u;
    return rep;
}

}  // namespace qpkdv::solver
