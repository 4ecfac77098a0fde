#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles/dense_oracles.hpp"
#include "oracles/field_oracles.hpp"
#include "qpkdv/opalg.hpp"
#include "qpkdv/sampling.hpp"

using namespace qpkdv;
using namespace qpkdv::spectral;
using namespace qpkdv::opalg;

namespace {
Truncation T1(int n) { return {1, n, n, 2}; }

ToplitzOperator random_op(const Truncation& t, std::mt19937_64& rng, double amp, double decay) {
    std::normal_distribution<double> g;
    ToplitzOperator A(t);
    for (std::size_t s = 0; s < A.offset_count(); ++s) {
        const Multi l = A.offset_of(s);
        Block b(A.dim_x(), A.dim_x());
        for (int r = 0; r < b.rows(); ++r)
            for (int c = 0; c < b.cols(); ++c)
                b(r, c) = amp * std::exp(-decay * bracket(l, t.nu, r - c)) * cplx(g(rng), g(rng));
        A.set_block(s, b);
    }
    return A;
}

// Real, reversibility-preserving: p_e + p_o d_x with p_e in X, p_o in Y.
ToplitzOperator structured_op(const Truncation& t, std::mt19937_64& rng, double amp) {
    const auto pe = random_field(t, rng, amp, 1.0, Parity::even, 2, 2);
    const auto po = random_field(t, rng, amp, 1.0, Parity::odd, 2, 2);
    return from_multiplication(pe) +
           compose(from_multiplication(po), from_multiplier([](int j) { return cplx(0, j); }, t));
}
}  // namespace

TEST_CASE("multiplication operators") {
    const auto t = T1(4);
    std::mt19937_64 rng(11);
    const auto u = random_field(t, rng);
    CHECK(oracle::max_diff(apply(from_multiplication(FourierField::constant(t, 1.0)), u), u) == 0.0);

    for (int k = 0; k < 5; ++k) {
        const auto p = random_field(t, rng, 1.0, 0.3);
        const auto T = from_multiplication(p);
        for (double s : {0.0, 1.5, 3.0})
            CHECK(decay_norm(T, s) == doctest::Approx(sobolev_norm(p, s)).epsilon(1e-14));
        CHECK(oracle::max_diff(apply(T, FourierField::constant(t, 1.0)), p) < 1e-15);

        const auto pb = random_field(t, rng, 1.0, 0.0, Parity::none, 2, 2);
        const auto hb = random_field(t, rng, 1.0, 0.0, Parity::none, 2, 2);
        CHECK(oracle::max_diff(apply(from_multiplication(pb), hb), multiply(pb, hb)) < 1e-12);

        const Eigen::MatrixXcd M = oracle::multiplication_matrix(p, t);
        CHECK((materialize(T) - M).cwiseAbs().maxCoeff() < 1e-15);
        CHECK((M * oracle::as_vector(u) - oracle::as_vector(apply(T, u))).cwiseAbs().maxCoeff() < 1e-13);
    }

    FourierField c(T1(1));
    c.set_real_pair(Multi{0}, 1, 0.5);
    const auto Mc = materialize(from_multiplication(c));
    // l = 0 diagonal block of cos x on |j| <= 1
    const Eigen::MatrixXcd blk = Mc.block(3, 3, 3, 3);
    Eigen::MatrixXcd expect(3, 3);
    expect << 0, 0.5, 0, 0.5, 0, 0.5, 0, 0.5, 0;
    CHECK((blk - expect).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("multipliers and diagonal operators") {
    const auto t = T1(5);
    std::mt19937_64 rng(12);
    const auto D3 = from_multiplier([](int j) { return std::pow(cplx(0, j), 3); }, t);
    const auto u = random_field(t, rng);
    CHECK(oracle::max_diff(apply(D3, u), dx_pow(u, 3)) < 1e-12);
    for (double s : {0.0, 2.0}) CHECK(decay_norm(D3, s) == doctest::Approx(125.0));
    CHECK(decay_norm(ToplitzOperator::identity(t), 3.0) == doctest::Approx(1.0));

    DiagonalOperator D(t);
    for (int j = -t.n_x; j <= t.n_x; ++j) D[j] = cplx(0.1 * j * j, -std::pow(j, 3));
    CHECK(D.conjugacy_defect() == 0.0);
    CHECK(oracle::max_diff(apply(D, u), apply(to_toplitz(D), u)) < 1e-14);

    // omega.d_phi + d_xxx has eigenvalues i(omega.l - j^3).
    DiagonalOperator airy(t);
    for (int j = -t.n_x; j <= t.n_x; ++j) airy[j] = cplx(0, -std::pow(j, 3));
    const Frequency w({1.0}, 1.25, 0.1, 1.0, 12);
    const auto M = materialize(airy, &w, {.with_omega_dphi = true});
    FourierField basis(t);
    for (std::size_t i = 0; i < basis.size(); ++i)
        CHECK(std::abs(M(i, i) - cplx(0, w.dot(basis.phi_of(i)) - std::pow(basis.j_of(i), 3))) < 1e-12);
    CHECK((M - Eigen::MatrixXcd(M.diagonal().asDiagonal())).cwiseAbs().maxCoeff() == 0.0);

    CHECK_THROWS_AS(materialize(ToplitzOperator::identity(t), nullptr, {.cap = 10}), DimensionError);
}

TEST_CASE("composition") {
    const auto t = T1(5);
    std::mt19937_64 rng(13);
    const auto A = random_op(t, rng, 1.0, 1.0);
    const auto I = ToplitzOperator::identity(t);
    CHECK(decay_norm(compose(I, A) - A, 1.0) < 1e-15);

    const auto p = random_field(t, rng, 1.0, 0.0, Parity::none, 2, 2);
    const auto q = random_field(t, rng, 1.0, 0.0, Parity::none, 2, 2);
    const auto PQ = compose(from_multiplication(p), from_multiplication(q));
    const auto h = random_field(t, rng, 1.0, 0.0, Parity::none, 1, 1);
    CHECK(oracle::max_diff(apply(PQ, h), apply(from_multiplication(multiply(p, q)), h)) < 1e-12);

    // Dense product agrees away from the time boundary for band-limited factors.
    auto Ab = smooth(random_op(t, rng, 1.0, 0.5), 2);
    auto Bb = smooth(random_op(t, rng, 1.0, 0.5), 2);
    ComposeStats st;
    const auto C = compose(Ab, Bb, &st);
    CHECK(st.dropped == 0.0);
    const auto rows = oracle::interior_rows(t, 1);
    CHECK(oracle::max_row_diff(materialize(C), materialize(Ab) * materialize(Bb), rows) < 1e-12);

    const auto Af = random_op(t, rng, 1.0, 0.2);
    compose(Af, Af, &st);
    CHECK(st.dropped > 0.0);

    const auto u = random_field(t, rng), v = random_field(t, rng);
    CHECK(oracle::max_diff(apply(A, 2.0 * u + (-3.0) * v), 2.0 * apply(A, u) + (-3.0) * apply(A, v)) < 1e-12);
}

TEST_CASE("decay norm and smoothing") {
    const auto t = T1(5);
    std::mt19937_64 rng(14);
    for (int k = 0; k < 5; ++k) {
        const auto A = random_op(t, rng, 1.0, 0.7);
        double prev = 0;
        for (double s : {0.0, 0.5, 1.0, 2.0, 3.5}) {
            const double v = decay_norm(A, s);
            CHECK(v >= prev);
            prev = v;
        }
        const double n0 = decay_norm(A, 0.0);
        const auto& b0 = A.block(A.slot(Multi{}));
        for (int j = 0; j < b0.rows(); ++j) CHECK(std::abs(b0(j, j)) <= n0);

        CHECK(decay_norm(smooth(A, 2 * t.n_phi) - A, 1.0) == 0.0);
        const auto S0 = smooth(A, 0);
        for (std::size_t s = 0; s < S0.offset_count(); ++s) CHECK(S0.has(s) == (s == S0.slot(Multi{})));
        for (int N : {1, 2, 4})
            for (int beta : {1, 2}) {
                const auto perp = A - smooth(A, N);
                CHECK(decay_norm(perp, 1.5) <= std::pow(N, -beta) * decay_norm(A, 1.5 + beta) * (1 + 1e-12));
            }
    }
}

TEST_CASE("neumann inverse") {
    const auto t = T1(6);
    CHECK(decay_norm(neumann_inverse(ToplitzOperator(t)) - ToplitzOperator::identity(t), 1.0) == 0.0);

    FourierField c(t);
    c.set_real_pair(Multi{0}, 1, 0.05);
    const auto Psi = from_multiplication(c);
    const auto Phi = ToplitzOperator::identity(t) + Psi;
    const auto Inv = neumann_inverse(Psi);
    CHECK(decay_norm(compose(Phi, Inv) - ToplitzOperator::identity(t), t.s0()) < 1e-10);

    // x-only coefficients: the truncated operator is block diagonal in time, dense inverse is exact.
    const Eigen::MatrixXcd dense = materialize(Phi).inverse();
    CHECK((materialize(Inv) - dense).cwiseAbs().maxCoeff() < 1e-9);

    std::mt19937_64 rng(15);
    auto R = random_op(t, rng, 1.0, 1.5);
    R *= cplx(0.3 / decay_norm(R, t.s0()));
    const auto RI = neumann_inverse(R);
    const auto M = materialize(ToplitzOperator::identity(t) + R);
    const Eigen::MatrixXcd rinv = M.inverse();
    CHECK(oracle::max_row_diff(materialize(RI), rinv, oracle::interior_rows(t, 0)) < 1e-5);
    CHECK(decay_norm(compose(ToplitzOperator::identity(t) + R, RI) - ToplitzOperator::identity(t), t.s0()) < 1e-6);

    auto big = random_op(t, rng, 1.0, 1.0);
    big *= cplx(0.6 / decay_norm(big, t.s0()));
    CHECK_THROWS_AS(neumann_inverse(big), ContractionError);
}

TEST_CASE("matrix exponential") {
    const auto t = T1(4);
    CHECK(decay_norm(matrix_exponential(ToplitzOperator(t)) - ToplitzOperator::identity(t), 1.0) == 0.0);
    std::mt19937_64 rng(16);
    auto P = random_op(t, rng, 1.0, 1.0);
    P *= cplx(1e-4 / decay_norm(P, t.s0()));
    const auto I = ToplitzOperator::identity(t);
    const auto E = matrix_exponential(P);
    const auto second = I + P + cplx(0.5) * compose(P, P);
    CHECK(decay_norm(E - second, t.s0()) < 1e-11);
    CHECK(decay_norm(E - (I + P), t.s0()) > 1e-10);

    // x-only generator: exact against the dense exponential.
    const auto w = random_field(t, rng, 0.3, 1.0, Parity::none, 0, -1);
    const auto G = compose(from_multiplication(pi0(w)),
                           from_multiplier([](int j) { return j == 0 ? cplx(0) : cplx(0, -1.0 / j); }, t));
    const auto EG = matrix_exponential(G);
    CHECK((materialize(EG) - oracle::dense_exp(materialize(G))).cwiseAbs().maxCoeff() < 1e-10);
    CHECK(decay_norm(compose(EG, matrix_exponential(cplx(-1) * G)) - I, t.s0()) < 1e-11);

    auto big = random_op(t, rng, 1.0, 1.0);
    big *= cplx(2.0 / decay_norm(big, t.s0()));
    CHECK_THROWS_AS(matrix_exponential(big), PreconditionError);
}

TEST_CASE("reality and reversibility classes") {
    const auto t = T1(4);
    std::mt19937_64 rng(17);
    const auto A = structured_op(t, rng, 0.2);
    const auto B = structured_op(t, rng, 0.2);
    CHECK(reality_defect(A) < 1e-15);
    CHECK(reversibility_defect(A) < 1e-15);
    const auto C = compose(A, B);
    CHECK(reality_defect(C) < 1e-14);
    CHECK(reversibility_defect(C) < 1e-14);
    const auto Ai = neumann_inverse(cplx(0.3 / decay_norm(A, t.s0())) * A);
    CHECK(reality_defect(Ai) < 1e-14);
    CHECK(reversibility_defect(Ai) < 1e-14);
    const auto u = random_field(t, rng, 1.0, 0.0, Parity::even);
    CHECK(structure_check(apply(A, u)).in_X);
    CHECK(reality_defect(random_op(t, rng, 1.0, 1.0)) > 1e-3);

    // A(phi) is the matrix of the multiplication at fixed phi.
    const auto p = random_field(t, rng, 1.0, 0.0, Parity::none, 2, 2);
    const double phi[1] = {0.7};
    const Block Ap = from_multiplication(p).at(phi);
    const double x = 1.3;
    cplx acc = 0;
    for (int j1 = -t.n_x; j1 <= t.n_x; ++j1) acc += Ap(j1 + t.n_x, 0 + t.n_x) * std::polar(1.0, j1 * x);
    // Column j2 = 0 applied to the constant 1 gives p(phi, x) when p fits in the x band.
    CHECK(std::abs(acc.real() - oracle::eval(p, phi, x)) < 1e-12);
}
