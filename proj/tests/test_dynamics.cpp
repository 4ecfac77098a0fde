#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "qpkdv/dynamics.hpp"
#include "qpkdv/sampling.hpp"
#include "qpkdv/solver.hpp"

using namespace qpkdv;
using namespace qpkdv::spectral;
using namespace qpkdv::dynamics;

namespace {

Truncation T1(int n) { return {1, n, n, 2}; }
Frequency freq1(double lambda = 1.25) { return Frequency({1.0}, lambda, 0.1, 1.0, 16); }

const char* kForced = "z0^2*z3 + 40*cos(phi_1)*sin(x)";

nonlin::LinearCoeffs zero_coeffs(const Truncation& t) {
    return {FourierField(t), FourierField(t), FourierField(t), FourierField(t)};
}

nonlin::LinearCoeffs random_coeffs(const Truncation& t, double eps, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    const auto spec = nonlin::builtin_nonlinearity("quasilinear_cubic", eps);
    return nonlin::linearized_coefficients(spec, random_field(t, rng, 0.5, 0.6, Parity::even, 2, 2));
}

struct Pipeline {
    nonlin::LinearCoeffs a;
    regularize::Regularization reg;
    kam::Reduction red;
};

Pipeline at_solution(double eps, const Truncation& t) {
    const auto w = freq1();
    const auto spec = nonlin::parse_nonlinearity(kForced, nonlin::DeclaredForm::raw_f, eps);
    const auto flags = nonlin::structure_flags(spec, 1);
    const auto u = solver::nash_moser(spec, flags, w, t).solution;
    auto reg = regularize::run_regularization(spec, flags, w, u);
    kam::Schedule sch;
    sch.target_decay = 1e-14;
    auto red = kam::reduce(reg, w, sch);
    return {nonlin::linearized_coefficients(spec, u), std::move(reg), std::move(red)};
}

double rel(const PhaseState& a, const PhaseState& b) { return hs_norm(a - b, 0) / hs_norm(b, 0); }

}  // namespace

TEST_CASE("phase state basics") {
    std::mt19937_64 rng(1);
    const auto h = random_state(6, rng);
    CHECK(reality_defect(h) == 0);
    CHECK(h[0] == cplx{});

    PhaseState e = PhaseState::zero(3);
    e[2] = 1;
    e[-2] = 1;
    CHECK(hs_norm(e, 1.5) == doctest::Approx(std::sqrt(2.0) * std::pow(2.0, 1.5)).epsilon(1e-14));

    FourierField f(T1(4));
    f.set_real_pair(Multi{1}, 2, cplx(0.3, -0.1));
    const double phi = 0.7;
    const auto s = slice(f, &phi);
    CHECK(std::abs(s[2] - cplx(0.3, -0.1) * std::polar(1.0, phi)) < 1e-16);
    CHECK(std::abs(s[-2] - std::conj(s[2])) < 1e-16);
    CHECK(std::abs(s[1]) == 0);
}

TEST_CASE("reduced flow") {
    const auto t = T1(6);
    std::mt19937_64 rng(2);
    const auto v0 = random_state(6, rng);
    const auto airy = kam::unperturbed_eigenvalues(t, 1.0, 0.0);

    CHECK(rel(reduced_flow(airy, v0, 0.0), v0) == 0);

    const double time = 2.3;
    const auto v = reduced_flow(airy, v0, time);
    for (int j = -6; j <= 6; ++j) {
        const double jj = static_cast<double>(j) * j * j;
        CHECK(std::abs(v[j] - std::polar(1.0, jj * time) * v0[j]) < 1e-13);
    }
    for (double s : {0.0, 1.0, 3.0}) CHECK(std::abs(hs_norm(v, s) / hs_norm(v0, s) - 1) < 1e-14);

    const auto once = reduced_flow(airy, v0, 1.7 + 0.9);
    const auto twice = reduced_flow(airy, reduced_flow(airy, v0, 1.7), 0.9);
    CHECK(rel(twice, once) < 1e-13);
    CHECK(twice.t == doctest::Approx(2.6));

    auto damped = airy;
    damped[3] += 0.5;
    const auto d = reduced_flow(damped, v0, 2.0);
    CHECK(std::abs(std::abs(d[3]) - std::exp(-1.0) * std::abs(v0[3])) < 1e-14);
}

TEST_CASE("integrator") {
    const auto t = T1(6);
    const auto w = freq1();
    std::mt19937_64 rng(3);
    const auto h0 = random_state(6, rng, 1.0, 3.0);

    SUBCASE("airy flow is exact") {
        IntegrateOptions opt;
        opt.dt = 0.01;
        opt.sample_dt = 0.5;
        const auto samples = integrate_linear(zero_coeffs(t), w, h0, 3.0, opt);
        REQUIRE(samples.size() == 7);
        for (const auto& h : samples) {
            for (int j = -6; j <= 6; ++j) {
                const double jj = static_cast<double>(j) * j * j;
                CHECK(std::abs(h[j] - std::polar(1.0, jj * h.t) * h0[j]) < 1e-12);
            }
        }
        CHECK(samples.back().t == doctest::Approx(3.0));
    }

    SUBCASE("fourth order under dt halving") {
        const auto a = random_coeffs(t, 0.1, 5);
        std::vector<PhaseState> ends;
        for (int k = 0; k < 3; ++k) {
            IntegrateOptions opt;
            opt.dt = 0.02 / (1 << k);
            opt.sample_dt = 10;
            ends.push_back(integrate_linear(a, w, h0, 1.0, opt).back());
        }
        const double order = std::log2(hs_norm(ends[0] - ends[1], 0) / hs_norm(ends[1] - ends[2], 0));
        MESSAGE("observed order " << order);
        CHECK(order >= 3.5);
        CHECK(reality_defect(ends[2]) < 1e-12);
    }

    SUBCASE("time translation") {
        const auto a = random_coeffs(t, 0.1, 6);
        IntegrateOptions opt;
        opt.dt = 0.01;
        opt.sample_dt = 100;
        const auto whole = integrate_linear(a, w, h0, 4.0, opt).back();
        const auto half = integrate_linear(a, w, h0, 2.0, opt).back();
        const auto rest = integrate_linear(a, w, half, 2.0, opt).back();
        CHECK(rest.t == doctest::Approx(4.0));
        CHECK(rel(rest, whole) < 1e-9);
    }

    SUBCASE("growth is detected") {
        auto a = zero_coeffs(t);
        a.a0 = FourierField::constant(t, -5.0);
        IntegrateOptions opt;
        opt.dt = 0.01;
        CHECK_THROWS_AS(integrate_linear(a, w, h0, 5.0, opt), ConvergenceError);
    }
}

TEST_CASE("frozen chain") {
    const auto t = T1(8);
    const auto p = at_solution(1e-3, t);
    const FrozenChain chain(p.reg, p.red);
    std::mt19937_64 rng(4);
    auto h = random_state(8, rng, 1.0, 3.0);
    for (double time : {0.0, 1.3, 7.9}) {
        h.t = time;
        const auto v = chain.to_reduced(h);
        CHECK(v.t == doctest::Approx(chain.reparam(time)).epsilon(1e-15));
        CHECK(reality_defect(v) < 1e-12);
        CHECK(hs_norm(chain.from_reduced(v, time) - h, 2) / hs_norm(h, 2) < 1e-10);
        CHECK(chain.reparam_inverse(chain.reparam(time)) == doctest::Approx(time).epsilon(1e-13));
    }
}

TEST_CASE("stability against the reduced flow") {
    const auto t = T1(8);
    std::mt19937_64 rng(8);
    const auto h0 = random_state(8, rng, 1.0, 3.0);
    IntegrateOptions opt;
    opt.dt = 0.01;
    opt.sample_dt = 5;

    SUBCASE("free equation") {
        const auto p = at_solution(0.0, t);
        const auto rep = stability_report(p.a, p.reg, p.red, h0, 20.0, 2.0, opt);
        CHECK(std::abs(rep.max_ratio - 1) < 1e-13);
        CHECK(std::abs(rep.min_ratio - 1) < 1e-13);
        CHECK(rep.v_drift < 1e-13);
        CHECK(rep.endpoint_discrepancy < 1e-12);
    }

    SUBCASE("forced equation over T = 100") {
        const auto p = at_solution(1e-3, t);
        const auto rep = stability_report(p.a, p.reg, p.red, h0, 100.0, 2.0, opt);
        MESSAGE("ratio [" << rep.min_ratio << ", " << rep.max_ratio << "], drift " << rep.v_drift
                          << ", discrepancy " << rep.endpoint_discrepancy);
        CHECK(rep.v_drift < 1e-8);
        CHECK(rep.min_ratio > 0.9);
        CHECK(rep.max_ratio < 1.1);
        CHECK(rep.endpoint_discrepancy < 1e-4);
        CHECK(rep.rows.size() == 21);
        const auto csv = trajectory_csv(rep);
        CHECK(csv.rfind("t,h_H1,h_Hs,v_Hs,discrepancy\n", 0) == 0);

        // self-convergence of the direct integration
        IntegrateOptions fine = opt;
        fine.dt = opt.dt / 2;
        const auto coarse_end = integrate_linear(p.a, p.reg.freq, h0, 10.0, opt).back();
        const auto fine_end = integrate_linear(p.a, p.reg.freq, h0, 10.0, fine).back();
        CHECK(rel(coarse_end, fine_end) < 1e-6);
    }

    SUBCASE("eigenvalues off the imaginary axis") {
        auto p = at_solution(1e-3, t);
        p.red.eigs[2] += 1e-3;
        CHECK_THROWS_AS(stability_report(p.a, p.reg, p.red, h0, 1.0, 2.0, opt), PreconditionError);
    }
}
