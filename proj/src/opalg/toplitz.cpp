#include <cmath>

#include "qpkdv/opalg.hpp"

namespace qpkdv::opalg {

using spectral::multi_count;
using spectral::multi_flat;
using spectral::multi_in_range;
using spectral::multi_unflat;

ToplitzOperator::ToplitzOperator(const Truncation& t)
    : trunc_(t), blocks_(multi_count(t.nu, 2 * t.n_phi)) {
    t.validate();
}

ToplitzOperator ToplitzOperator::identity(const Truncation& t) {
    ToplitzOperator I(t);
    I.set_block(I.slot(Multi{}), Block::Identity(I.dim_x(), I.dim_x()));
    return I;
}

std::size_t ToplitzOperator::slot(const Multi& l) const {
    return multi_flat(l, trunc_.nu, offset_range());
}

Multi ToplitzOperator::offset_of(std::size_t s) const {
    return multi_unflat(s, trunc_.nu, offset_range());
}

Block& ToplitzOperator::block_mut(std::size_t s) {
    if (!has(s)) blocks_[s] = Block::Zero(dim_x(), dim_x());
    return blocks_[s];
}

void ToplitzOperator::set_block(std::size_t s, Block b) {
    if (b.size() != 0 && (b.rows() != dim_x() || b.cols() != dim_x()))
        throw DimensionError("block size does not match truncation");
    blocks_[s] = std::move(b);
}

cplx ToplitzOperator::entry(const Multi& l, int j_out, int j_in) const {
    if (!multi_in_range(l, trunc_.nu, offset_range()) || std::abs(j_out) > trunc_.n_x ||
        std::abs(j_in) > trunc_.n_x)
        return 0;
    const auto s = slot(l);
    return has(s) ? blocks_[s](j_out + trunc_.n_x, j_in + trunc_.n_x) : cplx(0);
}

ToplitzOperator& ToplitzOperator::operator+=(const ToplitzOperator& o) {
    if (!(o.trunc_ == trunc_)) throw DimensionError("operator truncation mismatch");
    for (std::size_t s = 0; s < blocks_.size(); ++s)
        if (o.has(s)) block_mut(s) += o.blocks_[s];
    return *this;
}

ToplitzOperator& ToplitzOperator::operator-=(const ToplitzOperator& o) {
    if (!(o.trunc_ == trunc_)) throw DimensionError("operator truncation mismatch");
    for (std::size_t s = 0; s < blocks_.size(); ++s)
        if (o.has(s)) block_mut(s) -= o.blocks_[s];
    return *this;
}

ToplitzOperator& ToplitzOperator::operator*=(cplx a) {
    for (auto& b : blocks_)
        if (b.size()) b *= a;
    return *this;
}

Block ToplitzOperator::at(const double* phi) const {
    Block out = Block::Zero(dim_x(), dim_x());
    for (std::size_t s = 0; s < blocks_.size(); ++s) {
        if (!has(s)) continue;
        const Multi l = offset_of(s);
        double arg = 0;
        for (int d = 0; d < trunc_.nu; ++d) arg += l[d] * phi[d];
        out += std::polar(1.0, arg) * blocks_[s];
    }
    return out;
}

void ToplitzOperator::prune(double tol) {
    for (auto& b : blocks_)
        if (b.size() && b.cwiseAbs().maxCoeff() <= tol) b.resize(0, 0);
}

ToplitzOperator operator+(ToplitzOperator a, const ToplitzOperator& b) { return a += b; }
ToplitzOperator operator-(ToplitzOperator a, const ToplitzOperator& b) { return a -= b; }
ToplitzOperator operator*(cplx s, ToplitzOperator a) { return a *= s; }

ToplitzOperator from_multiplication(const FourierField& p, const Truncation& t) {
    if (p.nu() != t.nu) throw DimensionError("multiplier dimension mismatch");
    ToplitzOperator T(t);
    const int n = t.n_x;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i] == cplx(0)) continue;
        const Multi l = p.phi_of(i);
        const int j = p.j_of(i);
        if (!multi_in_range(l, t.nu, T.offset_range()) || std::abs(j) > 2 * n) continue;
        Block& b = T.block_mut(T.slot(l));
        for (int j1 = -n; j1 <= n; ++j1) {
            const int j2 = j1 - j;
            if (std::abs(j2) <= n) b(j1 + n, j2 + n) = p[i];
        }
    }
    return T;
}

ToplitzOperator from_multiplication(const FourierField& p) { return from_multiplication(p, p.trunc()); }

ToplitzOperator from_multiplier(const std::function<cplx(int)>& m, const Truncation& t) {
    ToplitzOperator T(t);
    Block b = Block::Zero(T.dim_x(), T.dim_x());
    for (int j = -t.n_x; j <= t.n_x; ++j) b(j + t.n_x, j + t.n_x) = m(j);
    T.set_block(T.slot(Multi{}), std::move(b));
    return T;
}

namespace {
// Slot of l1 - l2 for field indices a, b (both within n_phi).
struct OffsetTable {
    std::vector<Multi> l;
    OffsetTable(const Truncation& t) : l(t.phi_count()) {
        for (std::size_t a = 0; a < l.size(); ++a) l[a] = multi_unflat(a, t.nu, t.n_phi);
    }
};
}  // namespace

FourierField apply(const ToplitzOperator& A, const FourierField& u) {
    const auto& t = A.trunc();
    if (!(u.trunc() == t)) throw DimensionError("apply: truncation mismatch");
    FourierField out(t);
    const OffsetTable tab(t);
    const auto w = static_cast<Eigen::Index>(t.x_width());
    const std::size_t np = tab.l.size();
    for (std::size_t a = 0; a < np; ++a) {
        Eigen::Map<Eigen::VectorXcd> dst(out.coeffs().data() + a * w, w);
        for (std::size_t b = 0; b < np; ++b) {
            Multi d{};
            for (int k = 0; k < t.nu; ++k) d[k] = tab.l[a][k] - tab.l[b][k];
            const auto s = A.slot(d);
            if (!A.has(s)) continue;
            Eigen::Map<const Eigen::VectorXcd> src(u.coeffs().data() + b * w, w);
            dst.noalias() += A.block(s) * src;
        }
    }
    return out;
}

ToplitzOperator compose(const ToplitzOperator& A, const ToplitzOperator& B, ComposeStats* stats) {
    if (!(A.trunc() == B.trunc())) throw DimensionError("compose: truncation mismatch");
    const auto& t = A.trunc();
    ToplitzOperator C(t);
    const int R = A.offset_range();
    std::vector<std::size_t> as, bs;
    for (std::size_t s = 0; s < A.offset_count(); ++s) {
        if (A.has(s)) as.push_back(s);
        if (B.has(s)) bs.push_back(s);
    }
    std::vector<double> bnorm(B.offset_count());
    for (auto s : bs) bnorm[s] = B.block(s).norm();
    double dropped = 0;
    for (auto sa : as) {
        const Multi la = A.offset_of(sa);
        const double an = A.block(sa).norm();
        for (auto sb : bs) {
            const Multi lb = B.offset_of(sb);
            Multi l{};
            bool inside = true;
            for (int k = 0; k < t.nu; ++k) {
                l[k] = la[k] + lb[k];
                inside = inside && std::abs(l[k]) <= R;
            }
            if (!inside) {
                dropped += an * bnorm[sb];
                continue;
            }
            C.block_mut(C.slot(l)).noalias() += A.block(sa) * B.block(sb);
        }
    }
    if (stats) stats->dropped = dropped;
    return C;
}

double decay_norm(const ToplitzOperator& A, double s) {
    const auto& t = A.trunc();
    const int n = t.n_x;
    double acc = 0;
    std::vector<double> diag_sup(4 * n + 1);
    for (std::size_t sl = 0; sl < A.offset_count(); ++sl) {
        if (!A.has(sl)) continue;
        const Multi l = A.offset_of(sl);
        const Block& b = A.block(sl);
        std::fill(diag_sup.begin(), diag_sup.end(), 0.0);
        for (int r = 0; r < b.rows(); ++r)
            for (int c = 0; c < b.cols(); ++c) {
                double& m = diag_sup[r - c + 2 * n];
                m = std::max(m, std::abs(b(r, c)));
            }
        for (int j = -2 * n; j <= 2 * n; ++j) {
            const double v = diag_sup[j + 2 * n];
            if (v == 0) continue;
            acc += v * v * std::pow(spectral::bracket(l, t.nu, j), 2 * s);
        }
    }
    return std::sqrt(acc);
}

ToplitzOperator smooth(const ToplitzOperator& A, int N) {
    if (N < 0) throw DomainError("smoothing cutoff must be non-negative");
    ToplitzOperator out = A;
    for (std::size_t s = 0; s < A.offset_count(); ++s)
        if (A.has(s) && spectral::sup_norm(A.offset_of(s), A.trunc().nu) > N) out.set_block(s, Block());
    return out;
}

ToplitzOperator neumann_inverse(const ToplitzOperator& Psi, const SeriesOptions& opt) {
    const auto& t = Psi.trunc();
    const double s0 = t.s0();
    const double q = decay_norm(Psi, s0);
    if (q >= 0.5) throw ContractionError("Neumann series: |Psi|_{s0} = " + std::to_string(q) + " >= 1/2");
    ToplitzOperator sum = ToplitzOperator::identity(t);
    if (q == 0) return sum;
    ToplitzOperator term = sum;
    const ToplitzOperator minus = cplx(-1) * Psi;
    for (int k = 1; k <= opt.max_terms; ++k) {
        term = compose(minus, term);
        sum += term;
        if (decay_norm(term, s0) <= opt.tol * decay_norm(sum, s0)) return sum;
    }
    throw ConvergenceError("Neumann series did not converge in " + std::to_string(opt.max_terms) + " terms");
}

ToplitzOperator matrix_exponential(const ToplitzOperator& Psi, const SeriesOptions& opt) {
    const auto& t = Psi.trunc();
    const double s0 = t.s0();
    const double q = decay_norm(Psi, s0);
    if (q > 1.0) throw PreconditionError("matrix exponential: |Psi|_{s0} = " + std::to_string(q) + " > 1");
    ToplitzOperator I = ToplitzOperator::identity(t);
    if (q == 0) return I;
    int squarings = 0;
    double scaled = q;
    while (scaled > 0.125) {
        scaled /= 2;
        ++squarings;
    }
    const ToplitzOperator X = cplx(std::ldexp(1.0, -squarings)) * Psi;
    ToplitzOperator sum = I, term = I;
    for (int k = 1; k <= opt.max_terms; ++k) {
        term = cplx(1.0 / k) * compose(X, term);
        sum += term;
        if (decay_norm(term, s0) <= opt.tol) break;
        if (k == opt.max_terms) throw ConvergenceError("exponential series did not converge");
    }
    for (int k = 0; k < squarings; ++k) sum = compose(sum, sum);
    return sum;
}

double reality_defect(const ToplitzOperator& A) {
    const auto& t = A.trunc();
    const int n = t.n_x;
    double m = 0;
    for (std::size_t s = 0; s < A.offset_count(); ++s) {
        const Multi l = A.offset_of(s);
        Multi ml{};
        for (int k = 0; k < t.nu; ++k) ml[k] = -l[k];
        const auto sm = A.slot(ml);
        if (!A.has(s) && !A.has(sm)) continue;
        for (int j = -n; j <= n; ++j)
            for (int k = -n; k <= n; ++k)
                m = std::max(m, std::abs(std::conj(A.entry(l, j, k)) - A.entry(ml, -j, -k)));
    }
    return m;
}

namespace {
double parity_defect(const ToplitzOperator& A, double sign) {
    const auto& t = A.trunc();
    const int n = t.n_x;
    double m = 0;
    for (std::size_t s = 0; s < A.offset_count(); ++s) {
        const Multi l = A.offset_of(s);
        Multi ml{};
        for (int k = 0; k < t.nu; ++k) ml[k] = -l[k];
        if (!A.has(s) && !A.has(A.slot(ml))) continue;
        for (int j = -n; j <= n; ++j)
            for (int k = -n; k <= n; ++k)
                m = std::max(m, std::abs(A.entry(ml, -j, -k) - sign * A.entry(l, j, k)));
    }
    return m;
}

}  // namespace

double reversibility_defect(const ToplitzOperator& A) { return parity_defect(A, 1.0); }
double reversible_defect(const ToplitzOperator& A) { return parity_defect(A, -1.0); }

DiagonalOperator::DiagonalOperator(const Truncation& t) : trunc_(t), mu_(t.x_width()) {}

double DiagonalOperator::conjugacy_defect() const {
    double m = 0;
    for (int j = -trunc_.n_x; j <= trunc_.n_x; ++j)
        m = std::max(m, std::abs((*this)[j] - std::conj((*this)[-j])));
    return m;
}

FourierField apply(const DiagonalOperator& D, const FourierField& u) {
    if (!(u.trunc() == D.trunc())) throw DimensionError("apply: truncation mismatch");
    FourierField out = u;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] *= D[out.j_of(i)];
    return out;
}

ToplitzOperator to_toplitz(const DiagonalOperator& D) {
    return from_multiplier([&](int j) { return D[j]; }, D.trunc());
}

ToplitzOperator diagonal_commutator(const ToplitzOperator& X, const Frequency& w, const DiagonalOperator& D) {
    if (!(X.trunc() == D.trunc())) throw DimensionError("commutator: truncation mismatch");
    const int n = X.trunc().n_x;
    ToplitzOperator out(X.trunc());
    for (std::size_t s = 0; s < X.offset_count(); ++s) {
        if (!X.has(s)) continue;
        const cplx dl(0, w.dot(X.offset_of(s)));
        Block b = X.block(s);
        for (int r = 0; r < b.rows(); ++r)
            for (int c = 0; c < b.cols(); ++c) b(r, c) *= dl + D[r - n] - D[c - n];
        out.set_block(s, std::move(b));
    }
    return out;
}

namespace {
void add_omega_dphi(Eigen::MatrixXcd& M, const Truncation& t, const Frequency* w, bool on) {
    if (!on) return;
    if (!w) throw PreconditionError("materialize: frequency required for omega.d_phi");
    const auto wx = static_cast<std::size_t>(t.x_width());
    for (std::size_t a = 0; a < t.phi_count(); ++a) {
        const cplx d(0, w->dot(multi_unflat(a, t.nu, t.n_phi)));
        for (std::size_t b = 0; b < wx; ++b) M(a * wx + b, a * wx + b) += d;
    }
}

void check_cap(const Truncation& t, std::size_t cap) {
    if (t.size() > cap)
        throw DimensionError("materialize: dimension " + std::to_string(t.size()) + " exceeds cap " +
                             std::to_string(cap));
}
}  // namespace

Eigen::MatrixXcd materialize(const ToplitzOperator& A, const Frequency* w, const MaterializeOptions& opt) {
    const auto& t = A.trunc();
    check_cap(t, opt.cap);
    const auto N = static_cast<Eigen::Index>(t.size());
    const auto wx = t.x_width();
    Eigen::MatrixXcd M = Eigen::MatrixXcd::Zero(N, N);
    const OffsetTable tab(t);
    for (std::size_t a = 0; a < tab.l.size(); ++a)
        for (std::size_t b = 0; b < tab.l.size(); ++b) {
            Multi d{};
            for (int k = 0; k < t.nu; ++k) d[k] = tab.l[a][k] - tab.l[b][k];
            const auto s = A.slot(d);
            if (A.has(s)) M.block(a * wx, b * wx, wx, wx) = A.block(s);
        }
    add_omega_dphi(M, t, w, opt.with_omega_dphi);
    return M;
}

Eigen::MatrixXcd materialize(const DiagonalOperator& D, const Frequency* w, const MaterializeOptions& opt) {
    const auto& t = D.trunc();
    check_cap(t, opt.cap);
    const auto N = static_cast<Eigen::Index>(t.size());
    Eigen::MatrixXcd M = Eigen::MatrixXcd::Zero(N, N);
    for (Eigen::Index i = 0; i < N; ++i) M(i, i) = D[static_cast<int>(i % t.x_width()) - t.n_x];
    add_omega_dphi(M, t, w, opt.with_omega_dphi);
    return M;
}

}  // namespace qpkdv::opalg
