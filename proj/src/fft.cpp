#include "ltlab/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <numbers>
#include <tuple>

namespace ltlab::fft {

namespace {

std::mutex planner_lock;

fftw_plan plan_for(int d, int M, int sign) {
    static std::map<std::tuple<int, int, int>, fftw_plan> cache;
    std::lock_guard<std::mutex> g(planner_lock);
    auto key = std::make_tuple(d, M, sign);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    std::vector<int> n(d, M);
    size_t total = 1;
    for (int a = 0; a < d; ++a) total *= static_cast<size_t>(M);
    fftw_complex* scratch = fftw_alloc_complex(2 * total);
    // ESTIMATE keeps plans reproducible run to run
    fftw_plan p = fftw_plan_many_dft(d, n.data(), 1, scratch, nullptr, 1, 0, scratch + total, nullptr, 1, 0, sign,
                                     FFTW_ESTIMATE | FFTW_UNALIGNED);
    fftw_free(scratch);
    cache.emplace(key, p);
    return p;
}

std::vector<cplx> run(const std::vector<cplx>& in, int d, int M, int sign) {
    std::vector<cplx> src = in, out(in.size());
    fftw_execute_dft(plan_for(d, M, sign), reinterpret_cast<fftw_complex*>(src.data()),
                     reinterpret_cast<fftw_complex*>(out.data()));
    return out;
}

}  // namespace

std::vector<cplx> forward(const std::vector<cplx>& in, int d, int M) { return run(in, d, M, FFTW_FORWARD); }
std::vector<cplx> backward(const std::vector<cplx>& in, int d, int M) { return run(in, d, M, FFTW_BACKWARD); }

std::vector<double> wavenumbers(int M, double L) {
    std::vector<double> k(M);
    const double base = 2.0 * std::numbers::pi / L;
    for (int j = 0; j < M; ++j) k[j] = base * (j <= M / 2 ? j : j - M);
    return k;
}

}  // namespace ltlab::fft
