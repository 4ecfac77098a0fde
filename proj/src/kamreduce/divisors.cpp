#include <cmath>
#include <sstream>

#include "qpkdv/kamreduce.hpp"

namespace qpkdv::kam {

using spectral::cplx;

int Schedule::cutoff(int step, int cap) const {
    const double n = std::round(std::pow(static_cast<double>(N0), std::pow(chi, step)));
    return n >= cap ? cap : static_cast<int>(n);
}

DiagonalOperator unperturbed_eigenvalues(const Truncation& t, double m3, double m1) {
    DiagonalOperator D(t);
    for (int j = -t.n_x; j <= t.n_x; ++j) D[j] = cplx(0, -(m3 * j * j * j - m1 * j));
    return D;
}

std::string Violation::describe(int nu) const {
    std::ostringstream os;
    os << "divisor at l = (";
    for (int d = 0; d < nu; ++d) os << (d ? ", " : "") << l[d];
    os << "), j = " << j << ", k = " << k << ": |delta| = " << divisor << " < " << bound;
    return os.str();
}

std::optional<Violation> find_violation(const DiagonalOperator& eigs, const Frequency& w,
                                        const MelnikovOptions& opt) {
    const auto& t = eigs.trunc();
    const int n = t.n_x;
    const std::size_t count = spectral::multi_count(t.nu, opt.N);
    for (std::size_t a = 0; a < count; ++a) {
        const Multi l = spectral::multi_unflat(a, t.nu, opt.N);
        const double lnorm = std::max(1, spectral::sup_norm(l, t.nu));
        const double weight = opt.gamma * std::pow(lnorm, -opt.tau);
        const double reach = 16 * std::abs(w.bar_dot(l));
        const cplx il(0, w.dot(l));
        for (int j = -n; j <= n; ++j) {
            if (opt.order == MelnikovOrder::first) {
                const double j3 = std::pow(std::max(1, std::abs(j)), 3);
                if (j == 0 && spectral::sup_norm(l, t.nu) == 0) continue;
                if (opt.local_only && std::abs(j * j * j) > reach) continue;
                const double d = std::abs(il + eigs[j]);
                if (d < weight * j3) return Violation{l, j, j, d, weight * j3};
                continue;
            }
            for (int k = -n; k <= n; ++k) {
                if (j == k) continue;
                const double gap = std::abs(double(j) * j * j - double(k) * k * k);
                if (opt.local_only && gap > reach) continue;
                const double d = std::abs(il + eigs[j] - eigs[k]);
                if (d < weight * gap) return Violation{l, j, k, d, weight * gap};
            }
        }
    }
    return std::nullopt;
}

std::vector<bool> melnikov_mask(const std::vector<std::pair<double, DiagonalOperator>>& eigs_by_lambda,
                                const Frequency& base, const MelnikovOptions& opt) {
    std::vector<bool> mask;
    mask.reserve(eigs_by_lambda.size());
    for (const auto& [lambda, eigs] : eigs_by_lambda)
        mask.push_back(!find_violation(eigs, base.with_lambda(lambda), opt).has_value());
    return mask;
}

}  // namespace qpkdv::kam
