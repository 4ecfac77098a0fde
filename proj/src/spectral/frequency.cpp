#include <cmath>
#include <numeric>
#include <string>

#include "qpkdv/spectral.hpp"

namespace qpkdv::spectral {

Frequency::Frequency(std::vector<double> omega_bar, double lambda, double gamma0, double tau0,
                     int check_range)
    : omega_bar_(std::move(omega_bar)),
      lambda_(lambda),
      gamma0_(gamma0),
      tau0_(tau0),
      check_range_(check_range) {
    if (omega_bar_.empty() || nu() > kMaxNu) throw DimensionError("omega_bar must have 1..9 entries");
    if (lambda < 0.5 || lambda > 1.5) throw DomainError("lambda must lie in [1/2, 3/2]");
    if (gamma0 <= 0) throw DomainError("gamma0 must be positive");
    const std::size_t count = multi_count(nu(), check_range);
    for (std::size_t a = 0; a < count; ++a) {
        const Multi l = multi_unflat(a, nu(), check_range);
        const int n = sup_norm(l, nu());
        if (n == 0) continue;
        const double lhs = std::abs(bar_dot(l));
        if (lhs < 3 * gamma0 / std::pow(n, tau0))
            throw SmallDivisorError("Diophantine witness fails at |l| = " + std::to_string(n) +
                                    ": |omega_bar.l| = " + std::to_string(lhs));
    }
}

std::vector<double> Frequency::preset(int nu) {
    switch (nu) {
        case 1: return {1.0};
        case 2: return {1.0, (std::sqrt(5.0) - 1) / 2};
        case 3: return {1.0, std::cbrt(2.0) - 1, std::cbrt(4.0) - 1};
        default: throw DomainError("no frequency preset for nu = " + std::to_string(nu));
    }
}

double Frequency::norm() const {
    double s = 0;
    for (double w : omega_bar_) s += w * w;
    return lambda_ * std::sqrt(s);
}

double Frequency::bar_dot(const Multi& l) const {
    double s = 0;
    for (int i = 0; i < nu(); ++i) s += omega_bar_[i] * l[i];
    return s;
}

double Frequency::dot(const Multi& l) const { return lambda_ * bar_dot(l); }

Frequency Frequency::with_lambda(double lambda) const {
    Frequency f = *this;
    if (lambda < 0.5 || lambda > 1.5) throw DomainError("lambda must lie in [1/2, 3/2]");
    f.lambda_ = lambda;
    return f;
}

}  // namespace qpkdv::spectral
