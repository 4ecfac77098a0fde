#include <cmath>
#include <map>
#include <random>

#include "qpkdv/nonlin.hpp"
#include "qpkdv/sampling.hpp"

namespace qpkdv::nonlin {

using spectral::cplx;
using spectral::Grid;
using spectral::Truncation;

DeclaredForm form_from_string(const std::string& s) {
    if (s == "raw_f" || s == "raw") return DeclaredForm::raw_f;
    if (s == "dx_of_g") return DeclaredForm::dx_of_g;
    if (s == "hamiltonian_F" || s == "hamiltonian") return DeclaredForm::hamiltonian_F;
    throw DomainError("unknown declared form '" + s + "'");
}

std::string to_string(DeclaredForm f) {
    switch (f) {
        case DeclaredForm::raw_f: return "raw_f";
        case DeclaredForm::dx_of_g: return "dx_of_g";
        case DeclaredForm::hamiltonian_F: return "hamiltonian_F";
    }
    return "raw_f";
}

NonlinearitySpec parse_nonlinearity(const std::string& text, DeclaredForm form, double epsilon) {
    if (epsilon < 0) throw DomainError("epsilon must be non-negative");
    NonlinearitySpec s;
    s.text = text;
    s.form = form;
    s.epsilon = epsilon;
    s.source = parse_expression(text);
    switch (form) {
        case DeclaredForm::raw_f: s.f = s.source; break;
        case DeclaredForm::dx_of_g:
            if (depends_on(s.source, kZ0 + 3)) throw DomainError("g may depend on z0, z1, z2 only");
            s.f = total_dx(s.source);
            break;
        case DeclaredForm::hamiltonian_F:
            if (depends_on(s.source, kZ0 + 2) || depends_on(s.source, kZ0 + 3))
                throw DomainError("Hamiltonian density may depend on z0, z1 only");
            s.f = add(neg(total_dx(diff(s.source, kZ0))),
                      total_dx(total_dx(diff(s.source, kZ0 + 1))));
            break;
    }
    for (int i = 0; i < 4; ++i) s.df[i] = diff(s.f, kZ0 + i);
    s.max_phi = max_phi_index(s.f);
    return s;
}

namespace {
struct Builtin {
    const char* text;
    DeclaredForm form;
};

const std::map<std::string, Builtin>& registry() {
    static const std::map<std::string, Builtin> r = {
        {"quasilinear_cubic", {"z0^2*z3", DeclaredForm::raw_f}},
        {"hamiltonian_cubic", {"z1^3", DeclaredForm::hamiltonian_F}},
        {"fully_nonlinear_F", {"cos(phi_1+x)*z3 + z0^2*z1", DeclaredForm::raw_f}},
        {"forced_quasilinear_cubic", {"z0^2*z3 + 4*cos(phi_1)*sin(x)", DeclaredForm::raw_f}},
        {"forced_hamiltonian_cubic", {"z0*z1^2 + 4*cos(phi_1)*cos(x)*z0", DeclaredForm::hamiltonian_F}},
    };
    return r;
}
}  // namespace

NonlinearitySpec builtin_nonlinearity(const std::string& name, double epsilon) {
    const auto& r = registry();
    auto it = r.find(name);
    if (it == r.end()) throw DomainError("unknown builtin nonlinearity '" + name + "'");
    return parse_nonlinearity(it->second.text, it->second.form, epsilon);
}

std::vector<std::string> builtin_names() {
    std::vector<std::string> names;
    for (const auto& [k, v] : registry()) names.push_back(k);
    return names;
}

namespace {

constexpr int kProbes = 64;
constexpr double kTol = 1e-10;

using Point = std::array<double, kVarCount>;

std::vector<Point> probe_points(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> ang(0, 2 * M_PI), zz(-1, 1);
    std::vector<Point> pts(kProbes);
    for (auto& p : pts) {
        for (int i = 0; i < 4; ++i) p[kZ0 + i] = zz(rng);
        p[kX] = ang(rng);
        for (int d = 0; d < spectral::kMaxNu; ++d) p[kPhi1 + d] = ang(rng);
    }
    return pts;
}

bool safe_eval(const Expr& e, const Point& p, double& out) {
    try {
        out = eval(e, p);
        return std::isfinite(out);
    } catch (const DomainError&) {
        return false;
    }
}

// Zero symbolically or at every admissible probe.
bool vanishes(const Expr& e, const std::vector<Point>& pts, std::string& diag, const char* what) {
    if (is_zero(e)) return true;
    for (const auto& p : pts) {
        double v;
        if (!safe_eval(e, p, v)) continue;
        if (std::abs(v) > kTol) {
            diag += std::string(what) + " nonzero (" + std::to_string(v) + ") at z=(" +
                    std::to_string(p[0]) + "," + std::to_string(p[1]) + "," + std::to_string(p[2]) +
                    "," + std::to_string(p[3]) + "); ";
            return false;
        }
    }
    return true;
}

Point reflect(Point p) {
    p[kX] = -p[kX];
    for (int d = 0; d < spectral::kMaxNu; ++d) p[kPhi1 + d] = -p[kPhi1 + d];
    p[kZ0 + 1] = -p[kZ0 + 1];
    p[kZ0 + 3] = -p[kZ0 + 3];
    return p;
}

bool check_q(const NonlinearitySpec& s, int nu, const std::vector<Point>& pts, StructureFlags& fl) {
    const Expr lhs = s.df[2];
    const Expr& d3 = s.df[3];
    if (!vanishes(diff(d3, kZ0 + 3), pts, fl.diagnostic, "d2f/dz3dz3")) return false;
    std::string scratch;
    if (vanishes(lhs, pts, scratch, "df/dz2")) {
        fl.alpha = 0;
        return true;
    }
    Expr rhs = diff(d3, kX);
    for (int i = 0; i < 3; ++i) rhs = add(rhs, mul(var(kZ0 + i + 1), diff(d3, kZ0 + i)));

    std::vector<double> ratios;
    for (const auto& p : pts) {
        double a, b;
        if (!safe_eval(lhs, p, a) || !safe_eval(rhs, p, b) || std::abs(b) < 1e-6) continue;
        ratios.push_back(a / b);
    }
    if (ratios.empty()) {
        fl.diagnostic += "(Q) right-hand side vanishes at all probes; ";
        return false;
    }
    bool constant = true;
    for (double r : ratios) constant = constant && std::abs(r - ratios[0]) <= kTol * std::max(1.0, std::abs(ratios[0]));
    if (constant) {
        fl.alpha = ratios[0];
        return vanishes(sub(lhs, mul(num(fl.alpha), rhs)), pts, fl.diagnostic, "(Q) identity");
    }

    // Ratio depending on phi only: fit alpha(phi) on a phi grid.
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> ang(0, 2 * M_PI), zz(-1, 1);
    auto ratio_at = [&](const double* phi, double& out) {
        for (int tries = 0; tries < 32; ++tries) {
            Point p{};
            for (int i = 0; i < 4; ++i) p[kZ0 + i] = zz(rng);
            p[kX] = ang(rng);
            for (int d = 0; d < nu; ++d) p[kPhi1 + d] = phi[d];
            double a, b;
            if (!safe_eval(lhs, p, a) || !safe_eval(rhs, p, b) || std::abs(b) < 1e-6) continue;
            out = a / b;
            return true;
        }
        return false;
    };
    for (int k = 0; k < 8; ++k) {
        double phi[spectral::kMaxNu];
        for (int d = 0; d < nu; ++d) phi[d] = ang(rng);
        double r0, r;
        if (!ratio_at(phi, r0)) return false;
        for (int m = 0; m < 8; ++m)
            if (ratio_at(phi, r) && std::abs(r - r0) > kTol * std::max(1.0, std::abs(r0))) {
                fl.diagnostic += "(Q) ratio depends on (x, z); ";
                return false;
            }
    }
    const Truncation t{nu, 8, 1, 2};
    const Grid g = spectral::grid_for(t);
    std::vector<double> vals(g.size());
    double phi[spectral::kMaxNu];
    for (std::size_t a = 0; a < g.phi_points(); ++a) {
        g.phi_coords(a, phi);
        double r;
        if (!ratio_at(phi, r)) return false;
        for (int b = 0; b < g.m_x; ++b) vals[a * g.m_x + b] = r;
    }
    fl.alpha_constant = false;
    fl.alpha_field = spectral::analyze(vals, g, t);
    for (const auto& p : pts) {
        double a, b;
        if (!safe_eval(lhs, p, a) || !safe_eval(rhs, p, b)) continue;
        cplx al = 0;
        const auto& af = *fl.alpha_field;
        for (std::size_t i = 0; i < af.size(); ++i) {
            if (af.j_of(i) != 0) continue;
            const auto l = af.phi_of(i);
            double arg = 0;
            for (int d = 0; d < nu; ++d) arg += l[d] * p[kPhi1 + d];
            al += af[i] * std::polar(1.0, arg);
        }
        if (std::abs(a - al.real() * b) > 1e-8) {
            fl.diagnostic += "(Q) phi-dependent alpha fit fails; ";
            return false;
        }
    }
    return true;
}

struct GridVars {
    Grid grid;
    std::vector<double> phi[spectral::kMaxNu];
    std::vector<double> x;
    std::vector<double> z[4];
    std::array<const double*, kVarCount> ptr{};
};

GridVars grid_vars(const FourierField& u, int max_phi) {
    const auto& t = u.trunc();
    if (max_phi > t.nu) throw DimensionError("nonlinearity references phi beyond nu");
    GridVars gv;
    gv.grid = spectral::grid_for(t);
    const Grid& g = gv.grid;
    for (int d = 0; d < t.nu; ++d) gv.phi[d].resize(g.size());
    gv.x.resize(g.size());
    double phi[spectral::kMaxNu];
    for (std::size_t a = 0; a < g.phi_points(); ++a) {
        g.phi_coords(a, phi);
        for (int b = 0; b < g.m_x; ++b) {
            const std::size_t p = a * g.m_x + b;
            for (int d = 0; d < t.nu; ++d) gv.phi[d][p] = phi[d];
            gv.x[p] = g.x_node(b);
        }
    }
    for (int i = 0; i < 4; ++i) gv.z[i] = spectral::synthesize(spectral::dx_pow(u, i), g);
    for (int i = 0; i < 4; ++i) gv.ptr[kZ0 + i] = gv.z[i].data();
    gv.ptr[kX] = gv.x.data();
    for (int d = 0; d < t.nu; ++d) gv.ptr[kPhi1 + d] = gv.phi[d].data();
    return gv;
}

FourierField eval_on(const Expr& e, const GridVars& gv, double scale, const Truncation& out) {
    auto v = eval(e, gv.ptr, gv.grid.size());
    for (auto& x : v) x *= scale;
    return spectral::analyze(v, gv.grid, out);
}

bool total_derivative_probe(const NonlinearitySpec& s, int nu) {
    const Truncation t{nu, 6, 8, 2};
    std::mt19937_64 rng(23);
    for (int k = 0; k < 4; ++k) {
        const auto u = random_field(t, rng, 0.3, 0.0, Parity::none, 2, 2);
        const auto gv = grid_vars(u, s.max_phi);
        FourierField fx;
        try {
            fx = eval_on(s.f, gv, 1.0, t);
        } catch (const DomainError&) {
            return false;
        }
        const double scale = std::max(1.0, fx.max_abs());
        for (std::size_t i = 0; i < fx.size(); ++i)
            if (fx.j_of(i) == 0 && std::abs(fx[i]) > kTol * scale) return false;
    }
    return true;
}

}  // namespace

StructureFlags structure_flags(const NonlinearitySpec& s, int nu) {
    StructureFlags fl;
    nu = std::max(nu, std::max(1, s.max_phi));
    const auto pts = probe_points(99);
    fl.cond_F = vanishes(s.df[2], pts, fl.diagnostic, "df/dz2");
    fl.cond_Q = check_q(s, nu, pts, fl);
    std::string rdiag;
    bool rev = true;
    for (const auto& p : pts) {
        double a, b;
        if (!safe_eval(s.f, p, a) || !safe_eval(s.f, reflect(p), b)) continue;
        if (std::abs(a + b) > kTol * std::max(1.0, std::abs(a))) {
            rev = false;
            rdiag = "reversibility fails at x=" + std::to_string(p[kX]) + "; ";
            break;
        }
    }
    fl.reversible = rev;
    fl.diagnostic += rdiag;
    fl.hamiltonian = s.form == DeclaredForm::hamiltonian_F;
    fl.total_derivative = s.form != DeclaredForm::raw_f || total_derivative_probe(s, nu);
    return fl;
}

FourierField residual(const NonlinearitySpec& s, const Frequency& w, const FourierField& u) {
    FourierField F = spectral::omega_dphi(u, w) + spectral::dx_pow(u, 3);
    if (s.epsilon == 0) return F;
    const auto gv = grid_vars(u, s.max_phi);
    F += eval_on(s.f, gv, s.epsilon, u.trunc());
    return F;
}

LinearCoeffs linearized_coefficients(const NonlinearitySpec& s, const FourierField& u) {
    const auto& t = u.trunc();
    if (s.epsilon == 0) return {FourierField(t), FourierField(t), FourierField(t), FourierField(t)};
    const auto gv = grid_vars(u, s.max_phi);
    return {eval_on(s.df[3], gv, s.epsilon, t), eval_on(s.df[2], gv, s.epsilon, t),
            eval_on(s.df[1], gv, s.epsilon, t), eval_on(s.df[0], gv, s.epsilon, t)};
}

FourierField apply_linear(const LinearCoeffs& c, const Frequency& w, const FourierField& h) {
    const FourierField d1 = spectral::dx_pow(h, 1), d2 = spectral::dx_pow(h, 2),
                       d3 = spectral::dx_pow(h, 3);
    const FourierField* in[] = {&c.a3, &c.a2, &c.a1, &c.a0, &d3, &d2, &d1, &h};
    FourierField var_part = spectral::pointwise(
        in,
        [](std::span<const double> v) { return v[0] * v[4] + v[1] * v[5] + v[2] * v[6] + v[3] * v[7]; },
        h.trunc());
    return spectral::omega_dphi(h, w) + d3 + var_part;
}

}  // namespace qpkdv::nonlin
