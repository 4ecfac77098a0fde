#pragma once

#include <string>
#include <vector>

#include "qpkdv/nonlin.hpp"
#include "qpkdv/opalg.hpp"

namespace qpkdv::regularize {

using opalg::ToplitzOperator;
using spectral::FourierField;
using spectral::Frequency;

// omega.d_phi + top d_x^3 + c2 d_x^2 + c1 d_x + c0
struct VarCoeffs {
    FourierField top, c2, c1, c0;
};

VarCoeffs from_linearization(const nonlin::LinearCoeffs& a);
FourierField apply_operator(const VarCoeffs& L, const Frequency& w, const FourierField& h);
// g^{-1} L g for a nonvanishing multiplier g.
VarCoeffs conjugate_by_multiplication(const VarCoeffs& L, const FourierField& g, const Frequency& w);

enum class Mode { generic_Q, fully_nonlinear_F, hamiltonian };
std::string to_string(Mode m);

struct Step1 {
    FourierField b;  // phi only
    FourierField beta, beta_tilde;
    bool symplectic = false;
    VarCoeffs out;
    double identity_residual = 0;  // max |(1+a3)(1+beta_x)^3 - b| / max b
};
Step1 step1_space_diffeo(const VarCoeffs& L, const Frequency& w, bool symplectic);

struct Step2 {
    double m3 = 1;
    FourierField alpha, alpha_tilde, rho;
    VarCoeffs out;
    double identity_residual = 0;  // |b3 - m3 (1 + omega.d alpha)|
};
Step2 step2_time_reparam(const VarCoeffs& L1, const Frequency& w);

struct Step3 {
    FourierField v;
    VarCoeffs out;
    double max_c2_mean = 0;
    double t2_residual = 0;  // |3 m3 v_y + c2 v|
};
Step3 step3_descent_zero(const VarCoeffs& L2, double m3, const Frequency& w, double mean_tol = 1e-9);

struct Step4 {
    double m1 = 0;
    FourierField p;  // phi only
    VarCoeffs out;
    double average_defect = 0;  // max_phi |<e1>_x - m1|
};
Step4 step4_translation(const VarCoeffs& L3, const Frequency& w);

struct Step5 {
    FourierField w;
    ToplitzOperator S, S_inv, R;
    double r1_residual = 0;
};
Step5 step5_pseudo_diff(const VarCoeffs& L4, double m3, double m1, const Frequency& w, bool hamiltonian);

struct StepReport {
    std::string name;
    double identity_residual = 0;
    std::vector<std::pair<std::string, double>> norms;
};

struct Regularization {
    explicit Regularization(const Frequency& w) : freq(w) {}

    Mode mode = Mode::generic_Q;
    Frequency freq;
    double m3 = 1, m1 = 0;
    ToplitzOperator R;
    Step1 s1;
    Step2 s2;
    Step3 s3;  // v = 1 when skipped
    Step4 s4;
    Step5 s5;
    bool step3_skipped = false;
    std::vector<StepReport> reports;

    FourierField A(const FourierField& h) const;
    FourierField A_inv(const FourierField& h) const;
    FourierField B(const FourierField& h) const;
    FourierField B_inv(const FourierField& h) const;
    FourierField M(const FourierField& h) const;
    FourierField M_inv(const FourierField& h) const;
    FourierField T(const FourierField& h) const;
    FourierField T_inv(const FourierField& h) const;
    FourierField S(const FourierField& h) const;
    FourierField S_inv(const FourierField& h) const;

    // Phi1 = A B rho M T S, Phi2 = A B M T S.
    FourierField phi1(const FourierField& h) const;
    FourierField phi1_inv(const FourierField& h) const;
    FourierField phi2(const FourierField& h) const;
    FourierField phi2_inv(const FourierField& h) const;

    // L5 z = omega.d z + m3 z_xxx + m1 z_x + R z
    FourierField apply_L5(const FourierField& z) const;
};

struct RegularizeOptions {
    double mean_tol = 1e-9;
};

Mode select_mode(const nonlin::StructureFlags& flags);
Regularization run_regularization(const nonlin::NonlinearitySpec& spec, const nonlin::StructureFlags& flags,
                                  const Frequency& w, const FourierField& u,
                                  const RegularizeOptions& opt = {});
Regularization run_regularization(const VarCoeffs& L, Mode mode, const Frequency& w,
                                  const RegularizeOptions& opt = {});

// ||L(Phi2 z) - Phi1(L5 z)||_{s0} / ||z||_{s0+3}
double conjugacy_residual(const Regularization& reg, const VarCoeffs& L, const FourierField& z);

}  // namespace qpkdv::regularize
