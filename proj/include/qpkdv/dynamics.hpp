#pragma once

#include <random>
#include <string>
#include <vector>

#include "qpkdv/kamreduce.hpp"
#include "qpkdv/nonlin.hpp"
#include "qpkdv/regularize.hpp"

namespace qpkdv::dynamics {

using opalg::DiagonalOperator;
using spectral::cplx;
using spectral::FourierField;
using spectral::Frequency;

// Spatial Fourier coefficients h_j, |j| <= n_x, stored at j + n_x.
struct PhaseState {
    std::vector<cplx> h;
    double t = 0;

    int n_x() const { return static_cast<int>(h.size() / 2); }
    cplx& operator[](int j) { return h[static_cast<std::size_t>(j + n_x())]; }
    cplx operator[](int j) const { return h[static_cast<std::size_t>(j + n_x())]; }

    static PhaseState zero(int n_x, double t = 0);
};

double hs_norm(const PhaseState& u, double s);
double reality_defect(const PhaseState& u);
PhaseState operator-(const PhaseState& a, const PhaseState& b);

// Real state with |h_j| ~ amplitude <j>^-decay and h_0 = 0.
PhaseState random_state(int n_x, std::mt19937_64& rng, double amplitude = 1.0, double decay = 2.0);

// v_j(t0 + t) = exp(-mu_j t) v_j(t0)
PhaseState reduced_flow(const DiagonalOperator& eigs, const PhaseState& v0, double t);

// Coefficients of f(phi, .) at a fixed angle.
PhaseState slice(const FourierField& f, const double* phi);

struct IntegrateOptions {
    double dt = 1e-2;
    double sample_dt = 1.0;  // rounded to a whole number of steps
    double blowup = 1e6;
};

// dh/dt + (1 + a3) h_xxx + a2 h_xx + a1 h_x + a0 h = 0, coefficients evaluated at phi = omega t.
// Integrating-factor RK4 on the Airy part; returns samples including both ends.
std::vector<PhaseState> integrate_linear(const nonlin::LinearCoeffs& a, const Frequency& w, const PhaseState& h0,
                                         double T, const IntegrateOptions& opt = {});

// The chain of transformations evaluated at fixed angles.
class FrozenChain {
public:
    FrozenChain(const regularize::Regularization& reg, const kam::Reduction& red);

    // tau = t + alpha(omega t)
    double reparam(double t) const;
    double reparam_inverse(double tau) const;  // scalar Newton

    // v(tau) = W^{-1}(omega tau) A^{-1}(omega t) h(t)
    PhaseState to_reduced(const PhaseState& h) const;
    // h(t) = A(omega t) W(omega tau) v(tau) with tau = reparam(t)
    PhaseState from_reduced(const PhaseState& v, double t) const;

private:
    std::vector<double> angles(double t) const;
    PhaseState apply_A(const PhaseState& h, const double* phi, bool inverse) const;
    PhaseState apply_W(const PhaseState& h, const double* phi, bool inverse) const;

    const regularize::Regularization& reg_;
    const kam::Reduction& red_;
};

struct StabilityRow {
    double t = 0;
    double h_h1 = 0, h_hs = 0, v_hs = 0;
    double discrepancy = 0;  // ||h(t) - pushforward(t)||_{H^s} / ||h(0)||_{H^{s+1}}
};

struct StabilityReport {
    double max_ratio = 1, min_ratio = 1;  // ||h(t)||_{H^s} / ||h(0)||_{H^s}
    double v_drift = 0;                   // max_t | ||v(t)|| / ||v(0)|| - 1 |
    double endpoint_discrepancy = 0;
    std::vector<StabilityRow> rows;
};

StabilityReport stability_report(const nonlin::LinearCoeffs& a, const regularize::Regularization& reg,
                                 const kam::Reduction& red, const PhaseState& h0, double T, double s,
                                 const IntegrateOptions& opt = {});

std::string trajectory_csv(const StabilityReport& rep);

}  // namespace qpkdv::dynamics
