#include <cmath>

#include "qpkdv/kamreduce.hpp"

namespace qpkdv::kam {

using opalg::Block;
using spectral::cplx;

ToplitzOperator project_offsets(const ToplitzOperator& A, int N, bool keep_low) {
    ToplitzOperator out(A.trunc());
    for (std::size_t s = 0; s < A.offset_count(); ++s) {
        if (!A.has(s)) continue;
        const bool low = spectral::sup_norm(A.offset_of(s), A.trunc().nu) <= N;
        if (low == keep_low) out.set_block(s, A.block(s));
    }
    return out;
}

namespace {

DiagonalOperator average_diagonal(const ToplitzOperator& R) {
    const auto& t = R.trunc();
    DiagonalOperator d(t);
    const std::size_t s0 = R.slot(Multi{});
    if (!R.has(s0)) return d;
    for (int j = -t.n_x; j <= t.n_x; ++j) d[j] = R.block(s0)(j + t.n_x, j + t.n_x);
    return d;
}

}  // namespace

Homological solve_homological(const DiagonalOperator& D, const ToplitzOperator& R, const Frequency& w, int N,
                              double gamma, double tau) {
    const auto& t = R.trunc();
    const int n = t.n_x;
    Homological h;
    h.diag_part = average_diagonal(R);
    h.Psi = ToplitzOperator(t);

    for (std::size_t s = 0; s < R.offset_count(); ++s) {
        if (!R.has(s)) continue;
        const Multi l = R.offset_of(s);
        const int ln = spectral::sup_norm(l, t.nu);
        if (ln > N) continue;
        const cplx il(0, w.dot(l));
        const double weight = gamma * std::pow(std::max(1, ln), -tau);
        Block b = R.block(s);
        for (int r = 0; r < b.rows(); ++r)
            for (int c = 0; c < b.cols(); ++c) {
                if (ln == 0 && r == c) {
                    b(r, c) = 0;
                    continue;
                }
                if (b(r, c) == cplx(0)) continue;
                // j = k uses the first-order floor on omega.l.
                const int j = r - n, k = c - n;
                const double gap = j == k ? 1.0 : std::abs(double(j) * j * j - double(k) * k * k);
                const cplx delta = il + D[j] - D[k];
                if (std::abs(delta) < weight * gap) {
                    h.ok = false;
                    h.violation = Violation{l, j, k, std::abs(delta), weight * gap};
                    h.Psi = ToplitzOperator(t);
                    return h;
                }
                b(r, c) = -b(r, c) / delta;
            }
        h.Psi.set_block(s, std::move(b));
    }
    return h;
}

double homological_residual(const DiagonalOperator& D, const ToplitzOperator& R, const Homological& h,
                            const Frequency& w, int N) {
    ToplitzOperator res = opalg::diagonal_commutator(h.Psi, w, D) + project_offsets(R, N, true) -
                          opalg::to_toplitz(h.diag_part);
    double m = 0;
    for (std::size_t s = 0; s < res.offset_count(); ++s)
        if (res.has(s)) m = std::max(m, res.block(s).cwiseAbs().maxCoeff());
    return m;
}

}  // namespace qpkdv::kam
