#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "qpkdv/opalg.hpp"
#include "qpkdv/regularize.hpp"

namespace qpkdv::kam {

using opalg::DiagonalOperator;
using opalg::ToplitzOperator;
using spectral::FourierField;
using spectral::Multi;
using spectral::Frequency;
using spectral::Truncation;

struct Schedule {
    int N0 = 4;
    double chi = 1.5;
    double gamma = 1e-2;
    double tau = 3.0;
    int max_steps = 8;
    double target_decay = 1e-10;

    // round(N0^(chi^step)) capped at `cap`.
    int cutoff(int step, int cap) const;
};

// mu_j = -i (m3 j^3 - m1 j)
DiagonalOperator unperturbed_eigenvalues(const Truncation& t, double m3, double m1);

struct Violation {
    Multi l{};
    int j = 0, k = 0;
    double divisor = 0, bound = 0;
    std::string describe(int nu) const;
};

enum class MelnikovOrder { first, second };

struct MelnikovOptions {
    MelnikovOrder order = MelnikovOrder::second;
    double gamma = 1e-2;
    double tau = 3.0;
    int N = 0;               // |l| <= N
    bool local_only = true;  // skip |j^3 - k^3| > 16 |omega_bar.l|
};

// First violated divisor, if any. Second order: |i omega.l + mu_j - mu_k| >= gamma |j^3 - k^3| <l>^-tau
// for j != k. First order: |i omega.l + mu_j| >= gamma <j>^3 <l>^-tau for (l, j) != 0.
std::optional<Violation> find_violation(const DiagonalOperator& eigs, const Frequency& w,
                                        const MelnikovOptions& opt);

std::vector<bool> melnikov_mask(const std::vector<std::pair<double, DiagonalOperator>>& eigs_by_lambda,
                                const Frequency& base, const MelnikovOptions& opt);

struct Homological {
    ToplitzOperator Psi;
    DiagonalOperator diag_part;  // [R]
    bool ok = true;
    std::optional<Violation> violation;
};

// omega.d Psi + [D, Psi] + Pi_N R = [R]
Homological solve_homological(const DiagonalOperator& D, const ToplitzOperator& R, const Frequency& w, int N,
                              double gamma, double tau);

// Largest entry of omega.d Psi + [D, Psi] + Pi_N R - [R].
double homological_residual(const DiagonalOperator& D, const ToplitzOperator& R, const Homological& h,
                            const Frequency& w, int N);

ToplitzOperator project_offsets(const ToplitzOperator& A, int N, bool keep_low);

struct StepTrace {
    int step = 0;
    int N = 0;
    double r_s0 = 0, r_s2 = 0;  // |R|_{s0}, |R|_{s0+2}
    double sup_r = 0;           // sup_j |mu_j - mu_j^0|
    double psi_s0 = 0;
    double mask_fraction = 1;
};

struct ReducibilityState {
    int step = 0;
    DiagonalOperator D0;  // unperturbed part, kept for reporting
    DiagonalOperator D;
    ToplitzOperator R;
    ToplitzOperator Phi, Phi_inv;
    Schedule schedule;
    bool exponential = false;
    bool mask = true;
    std::optional<Violation> violation;
};

ReducibilityState initial_state(const DiagonalOperator& D0, const ToplitzOperator& R0, const Schedule& sched,
                                bool exponential);

// One quadratic step. Sets mask = false and leaves D, R untouched on a divisor violation.
ReducibilityState kam_step(const ReducibilityState& s, const Frequency& w, StepTrace* trace = nullptr);

struct Reduction {
    DiagonalOperator eigs;
    DiagonalOperator unperturbed;
    ToplitzOperator Phi, Phi_inv;
    std::vector<StepTrace> trace;
    bool converged = false;
    bool excluded = false;
    std::optional<Violation> violation;
    double sup_r = 0;
    double final_decay = 0;
};

Reduction reduce(const DiagonalOperator& D0, const ToplitzOperator& R0, const Frequency& w, const Schedule& sched,
                 bool exponential);
Reduction reduce(const regularize::Regularization& reg, const Frequency& w, const Schedule& sched);

// ||L5(Phi z) - Phi(omega.d + D_inf) z||_{s0} / ||z||_{s0+3}
double conjugation_residual(const regularize::Regularization& reg, const Reduction& red, const FourierField& z);

struct EigenvalueReport {
    double sup_r = 0;
    double max_re = 0;
    double mu0 = 0;
    double antisymmetry = 0;  // max_j |mu_j + mu_-j|
    double conjugacy = 0;     // max_j |mu_j - conj mu_-j|
    double sup_r_over_eps = 0;
};

EigenvalueReport eigenvalue_report(const DiagonalOperator& eigs, double m3, double m1, double epsilon);

std::string trace_csv(const std::vector<StepTrace>& trace);

}  // namespace qpkdv::kam
