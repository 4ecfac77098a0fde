#include <algorithm>
#include <cmath>
#include <numbers>

#include "qpkdv/fft.hpp"
#include "qpkdv/spectral.hpp"

namespace qpkdv::spectral {
namespace {

constexpr double kTwoPi = 2 * std::numbers::pi;

int wrap(int k, int m) { return ((k % m) + m) % m; }

std::vector<int> shape_of(const Grid& g) {
    std::vector<int> s(g.nu, g.m_phi);
    s.push_back(g.m_x);
    return s;
}

std::vector<bool> axes(const Grid& g, bool phi, bool x) {
    std::vector<bool> a(g.nu, phi);
    a.push_back(x);
    return a;
}

void check_fits(const Grid& g, const Truncation& t) {
    if (g.nu != t.nu || g.m_phi < t.phi_width() || g.m_x < t.x_width())
        throw DimensionError("grid too small for truncation");
}

// Coefficients scattered to their aliased positions on the grid.
std::vector<cplx> place(const FourierField& u, const Grid& g) {
    check_fits(g, u.trunc());
    std::vector<cplx> buf(g.size());
    const auto& t = u.trunc();
    const std::size_t nphi = t.phi_count();
    for (std::size_t a = 0; a < nphi; ++a) {
        const Multi l = multi_unflat(a, t.nu, t.n_phi);
        std::size_t row = 0;
        for (int d = 0; d < t.nu; ++d) row = row * g.m_phi + wrap(l[d], g.m_phi);
        for (int j = -t.n_x; j <= t.n_x; ++j)
            buf[row * g.m_x + wrap(j, g.m_x)] = u[a * t.x_width() + (j + t.n_x)];
    }
    return buf;
}

FourierField extract(const std::vector<cplx>& buf, const Grid& g, const Truncation& out) {
    check_fits(g, out);
    FourierField f(out);
    const double scale = 1.0 / static_cast<double>(g.size());
    const std::size_t nphi = out.phi_count();
    for (std::size_t a = 0; a < nphi; ++a) {
        const Multi l = multi_unflat(a, out.nu, out.n_phi);
        std::size_t row = 0;
        for (int d = 0; d < out.nu; ++d) row = row * g.m_phi + wrap(l[d], g.m_phi);
        for (int j = -out.n_x; j <= out.n_x; ++j)
            f[a * out.x_width() + (j + out.n_x)] = buf[row * g.m_x + wrap(j, g.m_x)] * scale;
    }
    f.make_real();
    return f;
}

Truncation cover(const Truncation& a, const Truncation& b) {
    if (a.nu != b.nu) throw DimensionError("nu mismatch");
    return {a.nu, std::max(a.n_phi, b.n_phi), std::max(a.n_x, b.n_x),
            std::max(a.oversample, b.oversample)};
}

}  // namespace

std::size_t Grid::phi_points() const {
    std::size_t c = 1;
    for (int i = 0; i < nu; ++i) c *= static_cast<std::size_t>(m_phi);
    return c;
}

double Grid::phi_node(int k) const { return kTwoPi * k / m_phi; }
double Grid::x_node(int k) const { return kTwoPi * k / m_x; }

void Grid::phi_coords(std::size_t a, double* out) const {
    for (int d = nu - 1; d >= 0; --d) {
        out[d] = phi_node(static_cast<int>(a % m_phi));
        a /= m_phi;
    }
}

Grid grid_for(const Truncation& t) { return {t.nu, t.grid_phi(), t.grid_x()}; }
Grid grid_for(const Truncation& a, const Truncation& b) { return grid_for(cover(a, b)); }

std::vector<double> synthesize(const FourierField& u, const Grid& g) {
    auto buf = place(u, g);
    fft::transform(buf, shape_of(g), axes(g, true, true), +1);
    std::vector<double> v(buf.size());
    for (std::size_t i = 0; i < buf.size(); ++i) v[i] = buf[i].real();
    return v;
}

FourierField analyze(std::span<const double> samples, const Grid& g, const Truncation& out) {
    if (samples.size() != g.size()) throw DimensionError("sample count does not match grid");
    std::vector<cplx> buf(samples.begin(), samples.end());
    fft::transform(buf, shape_of(g), axes(g, true, true), -1);
    return extract(buf, g, out);
}

FourierField analyze(std::span<const cplx> samples, const Grid& g, const Truncation& out,
                     double imag_tol) {
    if (samples.size() != g.size()) throw DimensionError("sample count does not match grid");
    double mag = 0, im = 0;
    for (const auto& s : samples) {
        mag = std::max(mag, std::abs(s));
        im = std::max(im, std::abs(s.imag()));
    }
    if (im > imag_tol * std::max(1.0, mag)) throw DomainError("non-real samples in analysis");
    std::vector<cplx> buf(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) buf[i] = samples[i].real();
    fft::transform(buf, shape_of(g), axes(g, true, true), -1);
    return extract(buf, g, out);
}

FourierField pointwise(std::span<const FourierField* const> inputs, const PointFn& fn,
                       const Truncation& out) {
    Truncation t = out;
    for (const auto* f : inputs) t = cover(t, f->trunc());
    const Grid g = grid_for(t);
    std::vector<std::vector<double>> vals;
    vals.reserve(inputs.size());
    for (const auto* f : inputs) vals.push_back(synthesize(*f, g));
    std::vector<double> res(g.size()), arg(inputs.size());
    for (std::size_t p = 0; p < g.size(); ++p) {
        for (std::size_t k = 0; k < inputs.size(); ++k) arg[k] = vals[k][p];
        res[p] = fn(arg);
    }
    return analyze(res, g, out);
}

FourierField multiply(const FourierField& a, const FourierField& b) {
    const FourierField* in[] = {&a, &b};
    return pointwise(in, [](std::span<const double> v) { return v[0] * v[1]; }, a.trunc());
}

FourierField divide(const FourierField& a, const FourierField& b) {
    const FourierField* in[] = {&a, &b};
    return pointwise(
        in,
        [](std::span<const double> v) {
            if (std::abs(v[1]) < 1e-14) throw DomainError("division by a vanishing field");
            return v[0] / v[1];
        },
        a.trunc());
}

FourierField exp_field(const FourierField& a) {
    const FourierField* in[] = {&a};
    return pointwise(in, [](std::span<const double> v) { return std::exp(v[0]); }, a.trunc());
}

namespace {

bool phi_only(const FourierField& f) {
    double off = 0;
    for (std::size_t i = 0; i < f.size(); ++i)
        if (f.j_of(i) != 0) off = std::max(off, std::abs(f[i]));
    return off <= 1e-13 * std::max(1.0, f.max_abs());
}

// Values of a phi-only field at arbitrary points via direct summation.
double eval_phi_only(const FourierField& f, const double* phi) {
    const auto& t = f.trunc();
    const std::size_t nphi = t.phi_count();
    cplx acc = 0;
    for (std::size_t a = 0; a < nphi; ++a) {
        const cplx c = f[a * t.x_width() + t.n_x];
        if (c == cplx{}) continue;
        const Multi l = multi_unflat(a, t.nu, t.n_phi);
        double arg = 0;
        for (int d = 0; d < t.nu; ++d) arg += l[d] * phi[d];
        acc += c * std::polar(1.0, arg);
    }
    return acc.real();
}

std::vector<double> phi_node_values(const FourierField& f, const Grid& g) {
    const auto all = synthesize(f, g);
    std::vector<double> v(g.phi_points());
    for (std::size_t a = 0; a < v.size(); ++a) v[a] = all[a * g.m_x];
    return v;
}

}  // namespace

double diffeo_derivative_sup(ComposeKind kind, const FourierField& disp, const Frequency& w) {
    const FourierField d = kind == ComposeKind::space ? dx_pow(disp, 1) : omega_dphi(disp, w);
    return sup_norm(d);
}

FourierField compose(ComposeKind kind, const FourierField& h, const FourierField& disp,
                     const Frequency& w) {
    return compose(kind, h, disp, w, h.trunc());
}

FourierField compose(ComposeKind kind, const FourierField& h, const FourierField& disp,
                     const Frequency& w, const Truncation& out) {
    if (h.nu() != disp.nu() || w.nu() != h.nu()) throw DimensionError("compose nu mismatch");
    if (diffeo_derivative_sup(kind, disp, w) > 0.5)
        throw DiffeoError("displacement derivative exceeds 1/2");
    const Grid g = grid_for(cover(cover(h.trunc(), disp.trunc()), out));
    const auto& th = h.trunc();
    std::vector<double> vals(g.size());

    if (kind == ComposeKind::space) {
        const auto beta = synthesize(disp, g);
        auto buf = place(h, g);
        fft::transform(buf, shape_of(g), axes(g, true, false), +1);
        for (std::size_t a = 0; a < g.phi_points(); ++a) {
            const cplx* row = buf.data() + a * g.m_x;
            for (int b = 0; b < g.m_x; ++b) {
                const std::size_t p = a * g.m_x + b;
                const cplx z = std::polar(1.0, g.x_node(b) + beta[p]);
                cplx zp = std::pow(std::conj(z), th.n_x);
                cplx acc = 0;
                for (int j = -th.n_x; j <= th.n_x; ++j) {
                    acc += row[wrap(j, g.m_x)] * zp;
                    zp *= z;
                }
                vals[p] = acc.real();
            }
        }
        return analyze(vals, g, out);
    }

    if (!phi_only(disp)) throw DimensionError("time displacement must depend on phi only");
    const auto alpha = phi_node_values(disp, g);
    std::vector<cplx> buf(g.size());
    std::vector<double> phi(g.nu);
    std::vector<std::vector<cplx>> e(g.nu, std::vector<cplx>(th.phi_width()));
    const std::size_t nphi = th.phi_count();
    for (std::size_t a = 0; a < g.phi_points(); ++a) {
        g.phi_coords(a, phi.data());
        for (int d = 0; d < g.nu; ++d) {
            const double shifted = phi[d] + w.omega(d) * alpha[a];
            for (int l = -th.n_phi; l <= th.n_phi; ++l) e[d][l + th.n_phi] = std::polar(1.0, l * shifted);
        }
        cplx* row = buf.data() + a * g.m_x;
        for (std::size_t q = 0; q < nphi; ++q) {
            const Multi l = multi_unflat(q, g.nu, th.n_phi);
            cplx f = 1;
            for (int d = 0; d < g.nu; ++d) f *= e[d][l[d] + th.n_phi];
            for (int j = -th.n_x; j <= th.n_x; ++j)
                row[wrap(j, g.m_x)] += h[q * th.x_width() + (j + th.n_x)] * f;
        }
    }
    fft::transform(buf, shape_of(g), axes(g, false, true), +1);
    for (std::size_t p = 0; p < g.size(); ++p) vals[p] = buf[p].real();
    return analyze(vals, g, out);
}

FourierField invert_torus_diffeo(ComposeKind kind, const FourierField& disp, const Frequency& w,
                                 const InverseOptions& opt) {
    if (diffeo_derivative_sup(kind, disp, w) > 0.5)
        throw DiffeoError("displacement derivative exceeds 1/2");
    const auto& t = disp.trunc();
    const Grid g = grid_for(t);

    if (kind == ComposeKind::space) {
        auto buf = place(disp, g);
        fft::transform(buf, shape_of(g), axes(g, true, false), +1);
        const auto beta = synthesize(disp, g);
        std::vector<double> inv(g.size());
        for (std::size_t p = 0; p < g.size(); ++p) inv[p] = -beta[p];
        for (std::size_t a = 0; a < g.phi_points(); ++a) {
            const cplx* row = buf.data() + a * g.m_x;
            for (int b = 0; b < g.m_x; ++b) {
                double& y = inv[a * g.m_x + b];
                bool done = false;
                for (int it = 0; it < opt.max_iter && !done; ++it) {
                    const cplx z = std::polar(1.0, g.x_node(b) + y);
                    cplx zp = std::pow(std::conj(z), t.n_x);
                    cplx acc = 0;
                    for (int j = -t.n_x; j <= t.n_x; ++j) {
                        acc += row[wrap(j, g.m_x)] * zp;
                        zp *= z;
                    }
                    const double next = -acc.real();
                    done = std::abs(next - y) < opt.tol;
                    y = next;
                }
                if (!done) throw ConvergenceError("space inverse fixed point did not converge");
            }
        }
        return analyze(inv, g, t);
    }

    if (!phi_only(disp)) throw DimensionError("time displacement must depend on phi only");
    std::vector<double> inv(g.phi_points());
    std::vector<double> phi(g.nu), shifted(g.nu);
    for (std::size_t a = 0; a < inv.size(); ++a) {
        g.phi_coords(a, phi.data());
        double y = -eval_phi_only(disp, phi.data());
        bool done = false;
        for (int it = 0; it < opt.max_iter && !done; ++it) {
            for (int d = 0; d < g.nu; ++d) shifted[d] = phi[d] + w.omega(d) * y;
            const double next = -eval_phi_only(disp, shifted.data());
            done = std::abs(next - y) < opt.tol;
            y = next;
        }
        if (!done) throw ConvergenceError("time inverse fixed point did not converge");
        inv[a] = y;
    }
    std::vector<double> vals(g.size());
    for (std::size_t p = 0; p < g.size(); ++p) vals[p] = inv[p / g.m_x];
    return analyze(vals, g, t);
}

}  // namespace qpkdv::spectral
