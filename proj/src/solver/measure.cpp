#include <atomic>
#include <cmath>
#include <thread>

#include "qpkdv/solver.hpp"

namespace qpkdv::solver {

std::vector<double> uniform_grid(double lo, double hi, int points) {
    if (points < 1) throw DomainError("grid needs at least one point");
    std::vector<double> g(static_cast<std::size_t>(points));
    for (int i = 0; i < points; ++i) g[i] = points == 1 ? lo : lo + (hi - lo) * i / (points - 1);
    return g;
}

namespace {

template <class Fn>
void parallel_for(std::size_t count, int workers, Fn&& fn) {
    const int n = std::max(1, std::min<int>(workers, static_cast<int>(count)));
    if (n == 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    std::exception_ptr failure;
    std::atomic<bool> failed{false};
    for (int k = 0; k < n; ++k)
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < count && !failed; i = next++) {
                try {
                    fn(i);
                } catch (...) {
                    if (!failed.exchange(true)) failure = std::current_exception();
                }
            }
        });
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);
}

double fraction_of(const std::vector<bool>& m) {
    if (m.empty()) return 0;
    std::size_t c = 0;
    for (bool b : m) c += b;
    return static_cast<double>(c) / static_cast<double>(m.size());
}

}  // namespace

MeasureReport cantor_measure(const nonlin::NonlinearitySpec& spec, const nonlin::StructureFlags& flags,
                             const Frequency& base, const MeasureConfig& cfg) {
    if (!(cfg.a > 0 && cfg.a < 1)) throw DomainError("cantor_measure: exponent a must lie in (0, 1)");
    MeasureReport rep;
    rep.a = cfg.a;
    const auto& t = cfg.trunc;
    const auto mu0 = kam::unperturbed_eigenvalues(t, 1, 0);
    for (double eps : cfg.epsilons) {
        MeasureRow row;
        row.epsilon = eps;
        row.gamma = std::pow(eps, cfg.a);
        auto scaled = spec;
        scaled.epsilon = eps;
        NashMoserConfig nm = cfg.nash_moser;
        nm.kam.gamma = row.gamma;

        const std::size_t n = cfg.lambdas.size();
        std::vector<char> acc(n, 0), base_ok(n, 0);
        parallel_for(n, cfg.workers, [&](std::size_t i) {
            const Frequency w = base.with_lambda(cfg.lambdas[i]);
            kam::MelnikovOptions mo;
            mo.gamma = 2 * row.gamma;
            mo.tau = nm.kam.tau;
            mo.N = 2 * t.n_phi;
            bool ok = !kam::find_violation(mu0, w, mo);
            mo.order = kam::MelnikovOrder::first;
            mo.N = t.n_phi;
            ok = ok && !kam::find_violation(mu0, w, mo);
            base_ok[i] = ok;
            try {
                const auto r = nash_moser(scaled, flags, w, t, nm);
                acc[i] = r.converged && !r.excluded_lambda;
            } catch (const Error&) {
                acc[i] = 0;
            }
        });
        row.accepted.assign(acc.begin(), acc.end());
        row.baseline.assign(base_ok.begin(), base_ok.end());
        row.fraction = fraction_of(row.accepted);
        row.baseline_fraction = fraction_of(row.baseline);
        rep.rows.push_back(std::move(row));
    }
    return rep;
}

}  // namespace qpkdv::solver
