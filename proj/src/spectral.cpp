#include <Eigen/Dense>

#include <cmath>
#include <limits>

#include "ltlab/fft.hpp"
#include "ltlab/solvers.hpp"

namespace ltlab::solvers {

using states::cplx;

std::vector<double> SpectralBoundInstance::half_distances() const {
    std::vector<double> R(anchors.size(), std::numeric_limits<double>::infinity());
    for (size_t j = 0; j < anchors.size(); ++j)
        for (size_t k = 0; k < anchors.size(); ++k) {
            if (j == k) continue;
            double q = 0.0;
            for (int a = 0; a < d; ++a) q += (anchors[j][a] - anchors[k][a]) * (anchors[j][a] - anchors[k][a]);
            R[j] = std::min(R[j], 0.5 * std::sqrt(q));
        }
    return R;
}

void SpectralBoundInstance::validate() const {
    if (grid.dim != d) throw InputError("spectral check: grid dimension differs from d");
    if (anchors.empty()) throw InputError("spectral check: no anchors");
    for (auto& a : anchors)
        if (static_cast<int>(a.size()) != d) throw InputError("spectral check: anchor dimension");
    auto R = half_distances();
    for (double r : R)
        if (r == 0.0) throw InputError("spectral check: anchors must be distinct");
    if (!(beta > 0) || !(beta < energy::hardy_constant(d, s)))
        throw DomainError("spectral check: beta must lie in (0, C_{d,s})");
    if (grid.size() > 6000) throw CapabilityError("spectral check: dense diagonalization limited to 6000 cells");
}

namespace {

// translation kernel of the |k|^{2s} multiplier on an M^d torus of side L
std::vector<double> circulant_kernel(int d, int M, double L, double s) {
    const GridSpec g{d, L, M};
    const auto k = fft::wavenumbers(M, L);
    std::vector<cplx> m(g.size());
    for (size_t i = 0; i < m.size(); ++i) {
        auto idx = g.unflatten(i);
        double k2 = 0.0;
        for (int a = 0; a < d; ++a) k2 += k[idx[a]] * k[idx[a]];
        m[i] = k2 > 0 ? std::pow(k2, s) : 0.0;
    }
    auto t = fft::backward(m, d, M);
    std::vector<double> out(t.size());
    for (size_t i = 0; i < t.size(); ++i) out[i] = t[i].real() / static_cast<double>(t.size());
    return out;
}

}  // namespace

SpectralResult spectral_bound_check(const SpectralBoundInstance& inst) {
    inst.validate();
    const GridSpec& g = inst.grid;
    const int d = g.dim, M = g.points;
    const Eigen::Index P = static_cast<Eigen::Index>(g.size());

    // the restricted form lives on a torus of twice the side, functions supported in the box
    const int Mk = inst.boundary == Boundary::Torus ? M : 2 * M;
    const double Lk = inst.boundary == Boundary::Torus ? g.box_side : 2.0 * g.box_side;
    const auto t = circulant_kernel(d, Mk, Lk, inst.s);
    const GridSpec gk{d, Lk, Mk};

    Eigen::MatrixXd H(P, P);
    std::vector<std::vector<int>> idx(P);
    for (Eigen::Index i = 0; i < P; ++i) idx[i] = g.unflatten(static_cast<size_t>(i));
    std::vector<int> disp(d);
    for (Eigen::Index i = 0; i < P; ++i)
        for (Eigen::Index j = 0; j < P; ++j) {
            for (int a = 0; a < d; ++a) disp[a] = ((idx[i][a] - idx[j][a]) % Mk + Mk) % Mk;
            H(i, j) = t[gk.flatten(disp)];
        }
    const double cap = std::pow(0.5 * g.dx(), -2.0 * inst.s);
    for (Eigen::Index i = 0; i < P; ++i) {
        auto x = g.point(static_cast<size_t>(i));
        double best = std::numeric_limits<double>::infinity();
        for (auto& X : inst.anchors) {
            double q = 0.0;
            for (int a = 0; a < d; ++a) q += (x[a] - X[a]) * (x[a] - X[a]);
            best = std::min(best, q);
        }
        const double V = std::min(cap, std::pow(best, -inst.s));
        H(i, i) -= inst.beta * V;
    }

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw SolverError("spectral check: eigensolver failed");
    SpectralResult r;
    const auto& ev = es.eigenvalues();
    r.lowest = ev(0);
    for (Eigen::Index i = 0; i < ev.size(); ++i)
        if (ev(i) < 0) {
            r.neg_sum += ev(i);
            ++r.negative_count;
        }
    for (double R : inst.half_distances())
        if (std::isfinite(R)) r.rhs += std::pow(2.0 * R, -2.0 * inst.s);
    r.rhs *= std::pow(inst.beta, 1.0 + d / (2.0 * inst.s));
    r.ratio = r.rhs > 0 ? (r.neg_sum < 0 ? -r.neg_sum / r.rhs : 0.0) : (r.neg_sum < 0 ? std::numeric_limits<double>::infinity() : 0.0);
    return r;
}

}  // namespace ltlab::solvers
