#include <cmath>

#include "qpkdv/cli.hpp"
#include "qpkdv/errors.hpp"
#include "qpkdv/sampling.hpp"

namespace qpkdv::cli {
namespace {

using spectral::FourierField;
using spectral::sobolev_norm;

double rel(const FourierField& a, const FourierField& b, double s) {
    return sobolev_norm(a - b, s) / std::max(1e-300, sobolev_norm(b, s));
}

class Table {
public:
    void add(const std::string& module, const std::string& name, double value, double threshold) {
        rows_.push_back({module, name, value, threshold, std::isfinite(value) && value < threshold});
    }
    // Records a failed check carrying the error text in its name.
    void fail(const std::string& module, const std::exception& e) {
        rows_.push_back({module, std::string("error: ") + e.what(), NAN, 0, false});
    }
    std::vector<Check> take() { return std::move(rows_); }

private:
    std::vector<Check> rows_;
};

void spectral_checks(Table& tab, const spectral::Truncation& t, std::mt19937_64& rng) {
    double dx = 0, trip = 0;
    for (int k = 0; k < 10; ++k) {
        const auto u = random_field(t, rng, 1.0, 0.2);
        dx = std::max(dx, (spectral::dx_pow(spectral::dx_pow(u, 1), -1) - spectral::pi0(u)).max_abs());
        const auto g = spectral::grid_for(t);
        trip = std::max(trip, (spectral::analyze(spectral::synthesize(u, g), g, t) - u).max_abs());
    }
    tab.add("spectral", "dx^-1 dx = pi0", dx, 1e-12);
    tab.add("spectral", "grid round trip", trip, 1e-12);
}

void opalg_checks(Table& tab, const spectral::Truncation& t, std::mt19937_64& rng) {
    double worst = 0;
    for (int k = 0; k < 5; ++k) {
        const auto p = random_field(t, rng, 1.0, 0.3);
        const auto T = opalg::from_multiplication(p);
        for (double s : {0.0, t.s0()})
            worst = std::max(worst, std::abs(opalg::decay_norm(T, s) / sobolev_norm(p, s) - 1));
    }
    tab.add("opalg", "|T_p|_s = ||p||_s", worst, 1e-12);
}

void homological_check(Table& tab, const spectral::Truncation& t, const spectral::Frequency& w,
                       std::mt19937_64& rng) {
    std::normal_distribution<double> g(0, 1);
    const auto D = kam::unperturbed_eigenvalues(t, 1.0, 0.0);
    opalg::ToplitzOperator R(t);
    for (std::size_t s = 0; s < R.offset_count(); ++s) {
        const auto l = R.offset_of(s);
        if (spectral::sup_norm(l, t.nu) > 2) continue;
        auto& b = R.block_mut(s);
        for (Eigen::Index i = 0; i < b.rows(); ++i)
            for (Eigen::Index j = 0; j < b.cols(); ++j) b(i, j) = 1e-2 * spectral::cplx(g(rng), g(rng));
    }
    const auto h = kam::solve_homological(D, R, w, 2, 1e-6, t.nu + 2.0);
    tab.add("kamreduce", "homological residual", h.ok ? kam::homological_residual(D, R, h, w, 2) : INFINITY, 1e-12);
}

}  // namespace

std::vector<Check> verify_suite(const ExperimentConfig& c) {
    Table tab;
    std::mt19937_64 rng(c.seed);
    const auto& t = c.trunc;
    const double eps = c.epsilons.front();
    const auto w = c.frequency(c.lambdas.front());
    const double s0 = t.s0();

    try {
        spectral_checks(tab, t, rng);
    } catch (const Error& e) {
        tab.fail("spectral", e);
    }
    try {
        opalg_checks(tab, t, rng);
    } catch (const Error& e) {
        tab.fail("opalg", e);
    }
    try {
        homological_check(tab, t, w, rng);
    } catch (const Error& e) {
        tab.fail("kamreduce", e);
    }

    try {
        const auto spec = c.spec(eps);
        const auto flags = nonlin::structure_flags(spec, t.nu);
        auto nm = c.nash_moser;
        nm.kam.gamma = c.gamma_for(eps);
        const auto sol = solver::nash_moser(spec, flags, w, t, nm);
        if (sol.excluded_lambda) throw SmallDivisorError("lambda excluded: " + sol.exclusion);
        tab.add("solver", "nash-moser residual / tolerance",
                sol.iterates.empty() ? INFINITY : sol.iterates.back().residual / sol.tol_res, 1.0);

        const auto reg = regularize::run_regularization(spec, flags, w, sol.solution, nm.regularize);
        const auto L = regularize::from_linearization(nonlin::linearized_coefficients(spec, sol.solution));
        const auto probe = random_field(t, rng, 1.0, 0.5, Parity::none, t.n_phi / 2, t.n_x / 2);
        tab.add("regularize", "semi-conjugacy residual", regularize::conjugacy_residual(reg, L, probe), 1e-6);

        const auto red = kam::reduce(reg, w, nm.kam);
        tab.add("kamreduce", "final remainder |R|_s0", red.final_decay, 10 * nm.kam.target_decay);
        tab.add("kamreduce", "conjugation residual", kam::conjugation_residual(reg, red, probe), 1e-8);
        const bool imaginary = flags.reversible || reg.mode == regularize::Mode::hamiltonian;
        if (imaginary) {
            const auto ev = kam::eigenvalue_report(red.eigs, reg.m3, reg.m1, eps);
            tab.add("kamreduce", "max |Re mu|", ev.max_re, 1e-10);
            tab.add("kamreduce", "|mu_j + mu_-j|", ev.antisymmetry, 1e-10);
        }

        const auto coeffs = nonlin::linearized_coefficients(spec, sol.solution);
        auto f = random_field(t, rng, 1.0, 0.5, flags.reversible ? Parity::odd : Parity::none, t.n_phi / 2,
                              t.n_x / 2);
        f.set_real_pair(spectral::Multi{}, 0, 0.0);
        const auto h = solver::right_inverse(reg, red, f, nm.kam.gamma, nm.kam.tau);
        tab.add("solver", "right inverse L h = f", rel(nonlin::apply_linear(coeffs, w, h), f, s0), 1e-6);

        if (imaginary) {
            auto h0 = dynamics::random_state(t.n_x, rng, c.dynamics.amplitude, c.dynamics.decay);
            const dynamics::FrozenChain chain(reg, red);
            h0.t = 0.37;
            tab.add("dynamics", "frozen chain round trip",
                    dynamics::hs_norm(chain.from_reduced(chain.to_reduced(h0), h0.t) - h0, c.dynamics.s) /
                        dynamics::hs_norm(h0, c.dynamics.s),
                    1e-8);
            h0.t = 0;
            dynamics::IntegrateOptions opt;
            opt.dt = c.dynamics.dt;
            opt.sample_dt = c.dynamics.sample_dt;
            const auto rep = dynamics::stability_report(coeffs, reg, red, h0, std::min(c.dynamics.T, 10.0),
                                                        c.dynamics.s, opt);
            tab.add("dynamics", "reduced norm drift (T <= 10)", rep.v_drift, 1e-8);
            tab.add("dynamics", "pushforward discrepancy", rep.endpoint_discrepancy, 1e-4);
        }
    } catch (const Error& e) {
        tab.fail("pipeline", e);
    }
    return tab.take();
}

}  // namespace qpkdv::cli
