#include "qpkdv/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <stdexcept>
#include <tuple>

namespace qpkdv::fft {
namespace {

using Key = std::tuple<std::vector<int>, std::vector<bool>, int>;

struct PlanCache {
    std::mutex mu;
    std::map<Key, fftw_plan> plans;

    ~PlanCache() {
        for (auto& [k, p] : plans) fftw_destroy_plan(p);
    }
};

PlanCache& cache() {
    static PlanCache c;
    return c;
}

fftw_plan plan_for(const std::vector<int>& shape, const std::vector<bool>& axes, int sign) {
    auto& c = cache();
    std::lock_guard lock(c.mu);
    Key key{shape, axes, sign};
    if (auto it = c.plans.find(key); it != c.plans.end()) return it->second;

    const int rank = static_cast<int>(shape.size());
    std::vector<int> stride(rank, 1);
    for (int d = rank - 2; d >= 0; --d) stride[d] = stride[d + 1] * shape[d + 1];
    std::vector<fftw_iodim> dims, loops;
    for (int d = 0; d < rank; ++d) {
        fftw_iodim io{shape[d], stride[d], stride[d]};
        (axes[d] ? dims : loops).push_back(io);
    }
    std::size_t total = 1;
    for (int s : shape) total *= static_cast<std::size_t>(s);
    std::vector<std::complex<double>> scratch(total);
    auto* buf = reinterpret_cast<fftw_complex*>(scratch.data());
    fftw_plan p = fftw_plan_guru_dft(static_cast<int>(dims.size()), dims.data(),
                                     static_cast<int>(loops.size()), loops.data(), buf, buf,
                                     sign < 0 ? FFTW_FORWARD : FFTW_BACKWARD,
                                     FFTW_ESTIMATE | FFTW_UNALIGNED);
    if (!p) throw std::runtime_error("fftw planning failed");
    c.plans.emplace(std::move(key), p);
    return p;
}

}  // namespace

void transform(std::vector<std::complex<double>>& data, const std::vector<int>& shape,
               const std::vector<bool>& axes, int sign) {
    bool any = false;
    for (bool a : axes) any = any || a;
    if (!any) return;
    fftw_plan p = plan_for(shape, axes, sign);
    auto* buf = reinterpret_cast<fftw_complex*>(data.data());
    fftw_execute_dft(p, buf, buf);
}

}  // namespace qpkdv::fft
