#include "qpkdv/cli.hpp"
#include "qpkdv/errors.hpp"

namespace qpkdv::cli {
namespace {

json complex_lists(const std::vector<spectral::cplx>& v) {
    std::vector<double> re, im;
    re.reserve(v.size());
    im.reserve(v.size());
    for (const auto& c : v) {
        re.push_back(c.real());
        im.push_back(c.imag());
    }
    return {{"re", re}, {"im", im}};
}

json violation_json(const std::optional<kam::Violation>& v, int nu) {
    if (!v) return nullptr;
    return {{"l", std::vector<int>(v->l.begin(), v->l.begin() + nu)},
            {"j", v->j},
            {"k", v->k},
            {"divisor", v->divisor},
            {"bound", v->bound},
            {"text", v->describe(nu)}};
}

}  // namespace

json to_json(const spectral::FourierField& u) {
    const auto& t = u.trunc();
    json j = {{"nu", t.nu}, {"n_phi", t.n_phi}, {"n_x", t.n_x}, {"oversample", t.oversample},
              {"layout", "index = flat(l) * (2 n_x + 1) + j + n_x, flat(l) mixed radix in l_i + n_phi, l_1 most significant"}};
    j.update(complex_lists(u.coeffs()));
    return j;
}

spectral::FourierField field_from_json(const json& j) {
    try {
        spectral::Truncation t{j.at("nu").get<int>(), j.at("n_phi").get<int>(), j.at("n_x").get<int>(),
                               j.at("oversample").get<int>()};
        spectral::FourierField u(t);
        const auto re = j.at("re").get<std::vector<double>>();
        const auto im = j.at("im").get<std::vector<double>>();
        if (re.size() != u.size() || im.size() != u.size())
            throw DimensionError("field payload has " + std::to_string(re.size()) + " coefficients, expected " +
                                 std::to_string(u.size()));
        for (std::size_t i = 0; i < u.size(); ++i) u[i] = {re[i], im[i]};
        return u;
    } catch (const json::exception& e) {
        throw ConfigError("field", e.what());
    }
}

json to_json(const opalg::DiagonalOperator& eigs) {
    const int n = eigs.trunc().n_x;
    std::vector<int> js;
    for (int j = -n; j <= n; ++j) js.push_back(j);
    json out = {{"j", js}};
    out.update(complex_lists(eigs.values()));
    return out;
}

json to_json(const solver::SolveReport& r) {
    json its = json::array();
    for (const auto& it : r.iterates)
        its.push_back({{"n", it.n}, {"u_norm", it.u_norm}, {"residual", it.residual}, {"N", it.N}, {"gamma", it.gamma}});
    return {{"lambda", r.lambda},
            {"epsilon", r.epsilon},
            {"converged", r.converged},
            {"excluded_lambda", r.excluded_lambda},
            {"exclusion", r.exclusion},
            {"tol_res", r.tol_res},
            {"order_estimate", solver::order_estimate(r.residuals())},
            {"m3", r.m3},
            {"m1", r.m1},
            {"iterates", its},
            {"eigenvalues", r.eigs.values().empty() ? json(nullptr) : to_json(r.eigs)}};
}

json to_json(const kam::Reduction& r) {
    const int nu = r.eigs.trunc().nu;
    json steps = json::array();
    for (const auto& s : r.trace)
        steps.push_back({{"step", s.step},
                         {"N", s.N},
                         {"R_s0", s.r_s0},
                         {"R_s0_plus_2", s.r_s2},
                         {"sup_r", s.sup_r},
                         {"psi_s0", s.psi_s0},
                         {"mask_fraction", s.mask_fraction}});
    return {{"converged", r.converged},
            {"excluded", r.excluded},
            {"violation", violation_json(r.violation, nu)},
            {"sup_r", r.sup_r},
            {"final_decay", r.final_decay},
            {"trace", steps},
            {"eigenvalues", to_json(r.eigs)}};
}

json to_json(const kam::EigenvalueReport& r) {
    return {{"sup_r", r.sup_r},          {"max_re", r.max_re},           {"mu0", r.mu0},
            {"antisymmetry", r.antisymmetry}, {"conjugacy", r.conjugacy}, {"sup_r_over_eps", r.sup_r_over_eps}};
}

json to_json(const solver::MeasureReport& r) {
    json rows = json::array();
    for (const auto& row : r.rows) {
        const std::vector<int> acc(row.accepted.begin(), row.accepted.end());
        const std::vector<int> base(row.baseline.begin(), row.baseline.end());
        rows.push_back({{"epsilon", row.epsilon},
                        {"gamma", row.gamma},
                        {"fraction", row.fraction},
                        {"baseline_fraction", row.baseline_fraction},
                        {"accepted", acc},
                        {"baseline", base}});
    }
    return {{"a", r.a}, {"rows", rows}};
}

json to_json(const dynamics::StabilityReport& r) {
    return {{"max_ratio", r.max_ratio},
            {"min_ratio", r.min_ratio},
            {"v_drift", r.v_drift},
            {"endpoint_discrepancy", r.endpoint_discrepancy},
            {"samples", r.rows.size()}};
}

}  // namespace qpkdv::cli
