#include <algorithm>
#include <cmath>

#include "qpkdv/spectral.hpp"

namespace qpkdv::spectral {

void Truncation::validate() const {
    if (nu < 1 || nu > kMaxNu) throw DimensionError("nu must lie in [1, 9]");
    if (n_phi < 1 || n_x < 1) throw DimensionError("n_phi and n_x must be >= 1");
    if (oversample < 2) throw DimensionError("oversample must be >= 2");
}

std::size_t Truncation::phi_count() const { return multi_count(nu, n_phi); }

namespace {
int smooth_even_at_least(int m) {
    if (m % 2) ++m;
    for (;; m += 2) {
        int r = m;
        for (int p : {2, 3, 5}) while (r % p == 0) r /= p;
        if (r == 1) return m;
    }
}
}  // namespace

int Truncation::grid_phi() const { return smooth_even_at_least(oversample * phi_width()); }
int Truncation::grid_x() const { return smooth_even_at_least(oversample * x_width()); }

std::size_t multi_count(int nu, int n) {
    std::size_t c = 1;
    for (int i = 0; i < nu; ++i) c *= static_cast<std::size_t>(2 * n + 1);
    return c;
}

std::size_t multi_flat(const Multi& l, int nu, int n) {
    std::size_t idx = 0;
    for (int i = 0; i < nu; ++i) idx = idx * static_cast<std::size_t>(2 * n + 1) + (l[i] + n);
    return idx;
}

Multi multi_unflat(std::size_t idx, int nu, int n) {
    Multi l{};
    const auto w = static_cast<std::size_t>(2 * n + 1);
    for (int i = nu - 1; i >= 0; --i) {
        l[i] = static_cast<int>(idx % w) - n;
        idx /= w;
    }
    return l;
}

int sup_norm(const Multi& l, int nu) {
    int m = 0;
    for (int i = 0; i < nu; ++i) m = std::max(m, std::abs(l[i]));
    return m;
}

bool multi_in_range(const Multi& l, int nu, int n) { return sup_norm(l, nu) <= n; }

double bracket(const Multi& l, int nu, int j) {
    return std::max({1, sup_norm(l, nu), std::abs(j)});
}

FourierField::FourierField(const Truncation& t) : trunc_(t), c_(t.size()) { t.validate(); }

bool FourierField::contains(const Multi& l, int j) const {
    return std::abs(j) <= trunc_.n_x && multi_in_range(l, trunc_.nu, trunc_.n_phi);
}

std::size_t FourierField::index(const Multi& l, int j) const {
    return multi_flat(l, trunc_.nu, trunc_.n_phi) * trunc_.x_width() + (j + trunc_.n_x);
}

Multi FourierField::phi_of(std::size_t i) const {
    return multi_unflat(i / trunc_.x_width(), trunc_.nu, trunc_.n_phi);
}

int FourierField::j_of(std::size_t i) const {
    return static_cast<int>(i % trunc_.x_width()) - trunc_.n_x;
}

cplx FourierField::get(const Multi& l, int j) const {
    return contains(l, j) ? c_[index(l, j)] : cplx{};
}

void FourierField::set_real_pair(const Multi& l, int j, cplx v) {
    const std::size_t i = index(l, j);
    const std::size_t p = partner(i);
    if (i == p) v = v.real();
    c_[i] = v;
    c_[p] = std::conj(v);
}

void FourierField::require_same(const FourierField& o) const {
    if (!(trunc_ == o.trunc_)) throw DimensionError("field truncation mismatch");
}

FourierField& FourierField::operator+=(const FourierField& o) {
    require_same(o);
    for (std::size_t i = 0; i < c_.size(); ++i) c_[i] += o.c_[i];
    return *this;
}

FourierField& FourierField::operator-=(const FourierField& o) {
    require_same(o);
    for (std::size_t i = 0; i < c_.size(); ++i) c_[i] -= o.c_[i];
    return *this;
}

FourierField& FourierField::operator*=(double a) {
    for (auto& v : c_) v *= a;
    return *this;
}

FourierField& FourierField::operator*=(cplx a) {
    for (auto& v : c_) v *= a;
    return *this;
}

FourierField FourierField::resized(const Truncation& t) const {
    if (t.nu != trunc_.nu) throw DimensionError("resize across different nu");
    FourierField out(t);
    const int np = std::min(t.n_phi, trunc_.n_phi);
    const int nx = std::min(t.n_x, trunc_.n_x);
    const std::size_t count = multi_count(t.nu, np);
    for (std::size_t a = 0; a < count; ++a) {
        const Multi l = multi_unflat(a, t.nu, np);
        for (int j = -nx; j <= nx; ++j) out.c_[out.index(l, j)] = c_[index(l, j)];
    }
    return out;
}

double FourierField::max_abs() const {
    double m = 0;
    for (const auto& v : c_) m = std::max(m, std::abs(v));
    return m;
}

double FourierField::reality_defect() const {
    double m = 0;
    for (std::size_t i = 0; i < c_.size(); ++i)
        m = std::max(m, std::abs(c_[i] - std::conj(c_[partner(i)])));
    return m;
}

void FourierField::make_real() {
    for (std::size_t i = 0; i < c_.size(); ++i) {
        const std::size_t p = partner(i);
        if (p < i) continue;
        const cplx v = 0.5 * (c_[i] + std::conj(c_[p]));
        c_[i] = v;
        c_[p] = std::conj(v);
    }
}

cplx FourierField::mean() const { return c_[c_.size() / 2]; }

FourierField FourierField::constant(const Truncation& t, double c) {
    FourierField f(t);
    f.c_[f.c_.size() / 2] = c;
    return f;
}

FourierField operator+(FourierField a, const FourierField& b) { return a += b; }
FourierField operator-(FourierField a, const FourierField& b) { return a -= b; }
FourierField operator*(double s, FourierField a) { return a *= s; }
FourierField operator-(FourierField a) { return a *= -1.0; }

double sobolev_norm(const FourierField& u, double s) {
    double acc = 0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        const double w = bracket(u.phi_of(i), u.nu(), u.j_of(i));
        acc += std::pow(w, 2 * s) * std::norm(u[i]);
    }
    return std::sqrt(acc);
}

double sup_norm(const FourierField& u) {
    const auto v = synthesize(u, grid_for(u.trunc()));
    double m = 0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

FourierField dx_pow(const FourierField& u, int k) {
    FourierField out = u;
    if (k == 0) return out;
    for (std::size_t i = 0; i < out.size(); ++i) {
        const int j = out.j_of(i);
        if (j == 0) {
            out[i] = 0;
            continue;
        }
        out[i] *= std::pow(cplx(0, j), k);
    }
    return out;
}

FourierField omega_dphi(const FourierField& u, const Frequency& w) {
    if (w.nu() != u.nu()) throw DimensionError("frequency dimension mismatch");
    FourierField out = u;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] *= cplx(0, w.dot(out.phi_of(i)));
    return out;
}

FourierField omega_dphi_inv(const FourierField& u, const Frequency& w, double floor_rel) {
    if (w.nu() != u.nu()) throw DimensionError("frequency dimension mismatch");
    const double floor = floor_rel * w.norm();
    FourierField out = u;
    for (std::size_t i = 0; i < out.size(); ++i) {
        const Multi l = out.phi_of(i);
        if (sup_norm(l, u.nu()) == 0) {
            out[i] = 0;
            continue;
        }
        const double d = w.dot(l);
        if (std::abs(d) < floor)
            throw SmallDivisorError("divisor |omega.l| below floor in omega_dphi_inv");
        out[i] /= cplx(0, d);
    }
    return out;
}

FourierField pi0(const FourierField& u) {
    FourierField out = u;
    for (std::size_t i = 0; i < out.size(); ++i)
        if (out.j_of(i) == 0) out[i] = 0;
    return out;
}

FourierField x_average(const FourierField& u) {
    FourierField out = u;
    for (std::size_t i = 0; i < out.size(); ++i)
        if (out.j_of(i) != 0) out[i] = 0;
    return out;
}

FourierField phi_average(const FourierField& u) {
    FourierField out = u;
    for (std::size_t i = 0; i < out.size(); ++i)
        if (sup_norm(out.phi_of(i), u.nu()) != 0) out[i] = 0;
    return out;
}

StructureInfo structure_check(const FourierField& u, double tol) {
    StructureInfo s;
    const double scale = std::max(sobolev_norm(u, u.trunc().s0()), 1e-300);
    const double t = tol * scale;
    double real_def = 0, x_def = 0, y_def = 0, space_avg = 0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        const cplx p = u[u.partner(i)];
        real_def = std::max(real_def, std::abs(u[i] - std::conj(p)));
        x_def = std::max(x_def, std::abs(u[i] - p));
        y_def = std::max(y_def, std::abs(u[i] + p));
        if (u.j_of(i) == 0) space_avg = std::max(space_avg, std::abs(u[i]));
    }
    s.total_average = u.mean();
    s.is_real = real_def <= t;
    s.in_X = s.is_real && x_def <= t;
    s.in_Y = s.is_real && y_def <= t;
    s.zero_space_average = space_avg <= t;
    s.zero_total_average = std::abs(s.total_average) <= t;
    return s;
}

void project_X(FourierField& u) {
    for (auto& v : u.coeffs()) v = v.real();
}

void project_Y(FourierField& u) {
    for (auto& v : u.coeffs()) v = cplx(0, v.imag());
}

FourierField ball_project(const FourierField& u, double N) {
    FourierField out = u;
    for (std::size_t i = 0; i < out.size(); ++i)
        if (bracket(out.phi_of(i), u.nu(), out.j_of(i)) > N) out[i] = 0;
    return out;
}

}  // namespace qpkdv::spectral
