#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles/galerkin.hpp"
#include "qpkdv/sampling.hpp"
#include "qpkdv/solver.hpp"

using namespace qpkdv;
using namespace qpkdv::spectral;
using namespace qpkdv::solver;

namespace {

Truncation T1(int n) { return {1, n, n, 2}; }
Frequency freq1(double lambda = 1.25) { return Frequency({1.0}, lambda, 0.1, 1.0, 16); }

const char* kForced = "z0^2*z3 + 40*cos(phi_1)*sin(x)";

double rel(const FourierField& a, const FourierField& b) {
    const double s0 = a.trunc().s0();
    return sobolev_norm(a - b, s0) / std::max(1e-300, sobolev_norm(b, s0));
}

struct Linearization {
    nonlin::NonlinearitySpec spec;
    FourierField u;
    regularize::Regularization reg;
    kam::Reduction red;
};

Linearization linearize(const char* name, double eps, const Truncation& t, std::uint64_t seed) {
    const auto w = freq1();
    std::mt19937_64 rng(seed);
    auto spec = nonlin::builtin_nonlinearity(name, eps);
    const auto flags = nonlin::structure_flags(spec, 1);
    auto u = random_field(t, rng, 0.5, 0.6, Parity::even, 2, 2);
    auto reg = regularize::run_regularization(spec, flags, w, u);
    kam::Schedule sch;
    sch.target_decay = 1e-14;
    auto red = kam::reduce(reg, w, sch);
    return {std::move(spec), std::move(u), std::move(reg), std::move(red)};
}

}  // namespace

TEST_CASE("diagonal inverse") {
    const auto t = T1(6);
    const auto w = freq1();
    const auto D = kam::unperturbed_eigenvalues(t, 1.0, 0.0);
    SUBCASE("single mode") {
        FourierField g(t);
        g.set_real_pair(Multi{1}, 2, cplx(0.5, 0.25));
        const auto h = diag_inverse(D, w, g, 1e-2, 3);
        const cplx d = cplx(0, w.omega(0) - 8.0);
        CHECK(std::abs(h.get(Multi{1}, 2) - cplx(0.5, 0.25) / d) < 1e-16);
        CHECK(std::abs(h.get(Multi{-1}, -2) - std::conj(cplx(0.5, 0.25) / d)) < 1e-16);
    }
    SUBCASE("constant right-hand side") {
        CHECK_THROWS_AS(diag_inverse(D, w, FourierField::constant(t, 1.0), 1e-2, 3), PreconditionError);
    }
    SUBCASE("random zero-average data") {
        std::mt19937_64 rng(41);
        for (int k = 0; k < 5; ++k) {
            FourierField g = random_field(t, rng, 1.0, 0.3);
            g.set_real_pair(Multi{}, 0, 0.0);
            const auto h = diag_inverse(D, w, g, 1e-2, 3);
            CHECK(sobolev_norm(omega_dphi(h, w) + opalg::apply(D, h) - g, t.s0()) < 1e-11);
            CHECK(h.reality_defect() < 1e-15);
        }
    }
    SUBCASE("small divisor") {
        FourierField g(t);
        g.set_real_pair(Multi{1}, 1, 1.0);
        try {
            diag_inverse(D, freq1(1.0), g, 1e-2, 3);
            FAIL("expected SmallDivisorError");
        } catch (const SmallDivisorError& e) {
            // The conjugate mode is met first.
            CHECK(std::string(e.what()).find("l = (-1), j = -1") != std::string::npos);
        }
    }
}

TEST_CASE("right inverse at eps = 0") {
    const auto t = T1(6);
    const auto w = freq1();
    auto lin = linearize("quasilinear_cubic", 0.0, t, 42);
    FourierField f(t);
    f.set_real_pair(Multi{1}, 1, 0.5);  // cos(phi + x)
    const auto h = right_inverse(lin.reg, lin.red, f, 1e-2, 3);
    CHECK(std::abs(h.get(Multi{1}, 1) - 0.5 / cplx(0, w.omega(0) - 1.0)) < 1e-14);
    FourierField expect(t);
    expect.set_real_pair(Multi{1}, 1, 0.5 / cplx(0, w.omega(0) - 1.0));
    CHECK((h - expect).max_abs() < 1e-14);
}

TEST_CASE("right inverse against the linearized operator") {
    const auto t = T1(8);
    const auto w = freq1();
    for (const char* name : {"quasilinear_cubic", "forced_hamiltonian_cubic"}) {
        CAPTURE(name);
        auto lin = linearize(name, 1e-3, t, 43);
        const auto coeffs = nonlin::linearized_coefficients(lin.spec, lin.u);
        std::mt19937_64 rng(44);
        for (int k = 0; k < 3; ++k) {
            const auto f = random_field(t, rng, 1.0, 0.5, Parity::odd, t.n_phi / 2, t.n_x / 2);
            const auto h = right_inverse(lin.reg, lin.red, f, 1e-2, 3);
            CHECK(rel(nonlin::apply_linear(coeffs, w, h), f) < 1e-7);
            CHECK(structure_check(h, 1e-12).in_X);
        }
    }
}

TEST_CASE("right inverse against a dense least-squares solve") {
    const auto t = T1(6);
    const auto w = freq1();
    // Linearize at the solution of the forced problem, where the iteration uses the inverse.
    const auto spec = nonlin::parse_nonlinearity(kForced, nonlin::DeclaredForm::raw_f, 1e-3);
    const auto flags = nonlin::structure_flags(spec, 1);
    const auto u = nash_moser(spec, flags, w, t).solution;
    const auto reg = regularize::run_regularization(spec, flags, w, u);
    kam::Schedule sch;
    sch.target_decay = 1e-14;
    const auto red = kam::reduce(reg, w, sch);
    const auto coeffs = nonlin::linearized_coefficients(spec, u);
    const Eigen::MatrixXcd L = oracle::linear_matrix(coeffs, w, t);
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(L, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    // Near-kernel directions: singular values far below the rest.
    Eigen::Index rank = sv.size();
    while (rank > 0 && sv[rank - 1] < 1e-6 * sv[0]) --rank;
    CHECK(rank == sv.size() - 1);
    const Eigen::MatrixXcd K = svd.matrixV().rightCols(sv.size() - rank);

    std::mt19937_64 rng(46);
    for (int k = 0; k < 3; ++k) {
        const auto f = random_field(t, rng, 1.0, 0.5, Parity::odd, t.n_phi / 2, t.n_x / 2);
        const Eigen::VectorXcd b = oracle::to_vector(f);
        Eigen::VectorXcd x = Eigen::VectorXcd::Zero(sv.size());
        for (Eigen::Index i = 0; i < rank; ++i)
            x += svd.matrixV().col(i) * (svd.matrixU().col(i).dot(b) / sv[i]);
        const auto h = right_inverse(reg, red, f, 1e-2, 3);
        Eigen::VectorXcd diff = oracle::to_vector(h) - x;
        diff -= K * (K.adjoint() * diff);
        const auto d = oracle::from_vector(diff, t);
        CHECK(sobolev_norm(d, t.s0()) / sobolev_norm(h, t.s0()) < 1e-6);
    }
}

TEST_CASE("nash-moser trivial and rejected inputs") {
    const auto t = T1(6);
    const auto w = freq1();
    auto spec = nonlin::builtin_nonlinearity("quasilinear_cubic", 0.0);
    const auto rep = nash_moser(spec, nonlin::structure_flags(spec, 1), w, t);
    CHECK(rep.converged);
    CHECK(rep.iterates.size() == 1);
    CHECK(rep.solution.max_abs() == 0);

    const auto bad = nonlin::parse_nonlinearity("2.5", nonlin::DeclaredForm::raw_f, 1e-3);
    const auto flags = nonlin::structure_flags(bad, 1);
    CHECK_FALSE(flags.reversible);
    CHECK_FALSE(flags.total_derivative);
    try {
        nash_moser(bad, flags, w, t);
        FAIL("expected PreconditionError");
    } catch (const PreconditionError& e) {
        CHECK(std::string(e.what()).find("eps m = 0") != std::string::npos);
    }
}

TEST_CASE("nash-moser on a forced reversible equation") {
    const auto t = T1(8);
    const auto w = freq1();
    const auto spec = nonlin::parse_nonlinearity(kForced, nonlin::DeclaredForm::raw_f, 1e-3);
    const auto flags = nonlin::structure_flags(spec, 1);
    REQUIRE(flags.reversible);
    const auto rep = nash_moser(spec, flags, w, t);
    REQUIRE(rep.converged);
    CHECK_FALSE(rep.excluded_lambda);
    const auto r = rep.residuals();
    for (std::size_t k = 1; k < r.size(); ++k) CHECK(r[k] < r[k - 1]);
    CHECK(r.back() < rep.tol_res);
    CHECK(order_estimate(r) > 1.5);
    CHECK(structure_check(rep.solution, 1e-14).in_X);
    CHECK(sobolev_norm(nonlin::residual(spec, w, rep.solution), t.s0()) == doctest::Approx(r.back()));

    const auto oracle_u = oracle::galerkin_newton(spec, w, FourierField::constant(t, rep.solution.mean().real()), 1e-13);
    CHECK(sobolev_norm(rep.solution - oracle_u, t.s0()) < 1e-8);

    auto small = spec;
    small.epsilon = 1e-4;
    const auto rep4 = nash_moser(small, flags, w, t);
    REQUIRE(rep4.converged);
    CHECK(sobolev_norm(rep4.solution, t.s0()) < sobolev_norm(rep.solution, t.s0()));
}

TEST_CASE("nash-moser keeps total derivatives mean-free") {
    const auto t = T1(6);
    const auto w = freq1();
    const auto spec = nonlin::parse_nonlinearity("z0^2 + 40*cos(phi_1)*sin(x)", nonlin::DeclaredForm::dx_of_g, 1e-3);
    const auto flags = nonlin::structure_flags(spec, 1);
    REQUIRE(flags.total_derivative);
    REQUIRE_FALSE(flags.reversible);
    const auto rep = nash_moser(spec, flags, w, t);
    REQUIRE(rep.converged);
    CHECK(std::abs(nonlin::residual(spec, w, rep.solution).get(Multi{}, 0)) < 1e-16);
}

TEST_CASE("nash-moser reports an excluded parameter") {
    const auto t = T1(6);
    const auto spec = nonlin::parse_nonlinearity(kForced, nonlin::DeclaredForm::raw_f, 1e-3);
    const auto rep = nash_moser(spec, nonlin::structure_flags(spec, 1), freq1(1.0), t);
    CHECK(rep.excluded_lambda);
    CHECK_FALSE(rep.converged);
    CHECK(rep.exclusion.find("divisor") != std::string::npos);
}

TEST_CASE("measure scan") {
    const auto spec = nonlin::parse_nonlinearity(kForced, nonlin::DeclaredForm::raw_f, 1e-3);
    const auto flags = nonlin::structure_flags(spec, 1);
    MeasureConfig cfg;
    cfg.epsilons = {1e-3, 1e-5};
    cfg.lambdas = uniform_grid(0.5, 1.5, 21);
    cfg.trunc = T1(4);
    const auto rep = cantor_measure(spec, flags, freq1(), cfg);
    REQUIRE(rep.rows.size() == 2);
    for (const auto& row : rep.rows) {
        CHECK(row.fraction >= 0);
        CHECK(row.fraction <= 1);
        CHECK(row.accepted.size() == 21);
        CHECK(row.gamma == doctest::Approx(std::sqrt(row.epsilon)));
    }
    CHECK(rep.rows[1].fraction >= rep.rows[0].fraction);
    CHECK(rep.rows[1].baseline_fraction >= rep.rows[0].baseline_fraction);
    CHECK_FALSE(rep.rows[0].accepted[10]);  // lambda = 1 is resonant

    cfg.workers = 3;
    const auto par = cantor_measure(spec, flags, freq1(), cfg);
    for (std::size_t k = 0; k < 2; ++k) CHECK(par.rows[k].accepted == rep.rows[k].accepted);

    cfg.a = 1.0;
    CHECK_THROWS_AS(cantor_measure(spec, flags, freq1(), cfg), DomainError);
}
