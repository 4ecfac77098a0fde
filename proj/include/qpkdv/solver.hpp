#pragma once

#include <string>
#include <vector>

#include "qpkdv/kamreduce.hpp"
#include "qpkdv/nonlin.hpp"
#include "qpkdv/regularize.hpp"

namespace qpkdv::solver {

using opalg::DiagonalOperator;
using spectral::FourierField;
using spectral::Frequency;
using spectral::Truncation;

// Zero-average solution of (omega.d + D) w = g. Throws PreconditionError when g has a (0,0) mode and
// SmallDivisorError naming (l, j) when |i omega.l + mu_j| < gamma <j>^3 <l>^-tau.
FourierField diag_inverse(const DiagonalOperator& eigs, const Frequency& w, const FourierField& g, double gamma,
                          double tau, double mean_tol = 1e-10);

// h = W2 Linf^{-1} W1^{-1} f with W_i = Phi_i Phi_inf.
FourierField right_inverse(const regularize::Regularization& reg, const kam::Reduction& red, const FourierField& f,
                           double gamma, double tau);

struct NashMoserConfig {
    kam::Schedule kam;  // gamma and tau are shared with the outer loop
    int N0 = 4;
    double chi = 1.5;
    double tol_res = -1;  // negative: 1e-10 (1 + ||F(0)||_{s0})
    int max_iters = 12;
    regularize::RegularizeOptions regularize;
};

struct Iterate {
    int n = 0;
    double u_norm = 0;
    double residual = 0;
    int N = 0;
    double gamma = 0;
};

struct SolveReport {
    double lambda = 1, epsilon = 0;
    std::vector<Iterate> iterates;
    FourierField solution;
    DiagonalOperator eigs;
    double m3 = 1, m1 = 0;
    bool converged = false;
    bool excluded_lambda = false;
    std::string exclusion;
    double tol_res = 0;

    std::vector<double> residuals() const;
};

// Newton-type iteration with smoothing; u_0 = 0.
SolveReport nash_moser(const nonlin::NonlinearitySpec& spec, const nonlin::StructureFlags& flags, const Frequency& w,
                       const Truncation& t, const NashMoserConfig& cfg = {});

// log(r_{n+1}/r_n) / log(r_n/r_{n-1}) over the last three entries; 0 with fewer than three.
double order_estimate(const std::vector<double>& residuals);

struct MeasureConfig {
    std::vector<double> epsilons;
    std::vector<double> lambdas;
    double a = 0.5;  // gamma = eps^a
    Truncation trunc;
    NashMoserConfig nash_moser;
    int workers = 1;
};

struct MeasureRow {
    double epsilon = 0, gamma = 0;
    double fraction = 0;
    double baseline_fraction = 0;  // masks at mu_j = -i j^3
    std::vector<bool> accepted, baseline;
};

struct MeasureReport {
    double a = 0.5;
    std::vector<MeasureRow> rows;
};

// Grid fraction of lambda values for which the iteration converges without exclusion.
MeasureReport cantor_measure(const nonlin::NonlinearitySpec& spec, const nonlin::StructureFlags& flags,
                             const Frequency& base, const MeasureConfig& cfg);

std::vector<double> uniform_grid(double lo, double hi, int points);

}  // namespace qpkdv::solver
