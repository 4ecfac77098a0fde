#include <cmath>
#include <sstream>

#include "qpkdv/dynamics.hpp"
#include "qpkdv/errors.hpp"

namespace qpkdv::dynamics {

StabilityReport stability_report(const nonlin::LinearCoeffs& a, const regularize::Regularization& reg,
                                 const kam::Reduction& red, const PhaseState& h0, double T, double s,
                                 const IntegrateOptions& opt) {
    double max_re = 0, scale = 1;
    for (const cplx& mu : red.eigs.values()) {
        max_re = std::max(max_re, std::abs(mu.real()));
        scale = std::max(scale, std::abs(mu));
    }
    if (max_re > 1e-8 * scale)
        throw PreconditionError("stability needs purely imaginary eigenvalues; max |Re mu| = " +
                                std::to_string(max_re));
    if (static_cast<int>(red.eigs.values().size()) != static_cast<int>(h0.h.size()))
        throw DimensionError("initial state and reduction differ in n_x");

    const auto samples = integrate_linear(a, reg.freq, h0, T, opt);
    const FrozenChain chain(reg, red);
    const PhaseState v0 = chain.to_reduced(h0);
    const double h0_s = std::max(hs_norm(h0, s), 1e-300);
    const double h0_s1 = std::max(hs_norm(h0, s + 1), 1e-300);
    const double v0_s = std::max(hs_norm(v0, s), 1e-300);

    StabilityReport rep;
    rep.max_ratio = rep.min_ratio = 1;
    for (const PhaseState& h : samples) {
        const PhaseState v = chain.to_reduced(h);
        const PhaseState predicted = chain.from_reduced(reduced_flow(red.eigs, v0, v.t - v0.t), h.t);
        StabilityRow row;
        row.t = h.t;
        row.h_h1 = hs_norm(h, 1);
        row.h_hs = hs_norm(h, s);
        row.v_hs = hs_norm(v, s);
        row.discrepancy = hs_norm(h - predicted, s) / h0_s1;

        const double ratio = row.h_hs / h0_s;
        rep.max_ratio = std::max(rep.max_ratio, ratio);
        rep.min_ratio = std::min(rep.min_ratio, ratio);
        rep.v_drift = std::max(rep.v_drift, std::abs(row.v_hs / v0_s - 1));
        rep.endpoint_discrepancy = row.discrepancy;
        rep.rows.push_back(row);
    }
    return rep;
}

std::string trajectory_csv(const StabilityReport& rep) {
    std::ostringstream os;
    os.precision(12);
    os << "t,h_H1,h_Hs,v_Hs,discrepancy\n";
    for (const auto& r : rep.rows) os << r.t << ',' << r.h_h1 << ',' << r.h_hs << ',' << r.v_hs << ',' << r.discrepancy << '\n';
    return os.str();
}

}  // namespace qpkdv::dynamics
