#pragma once

// Shared test-side oracles.  Everything here is an independent evaluation
// path: direct convolutions, quadrature, finite differences.  Nothing calls
// into the code path it is used to check.

#include <cmath>
#include <functional>
#include <random>

#include "bpmhd/rheology.hpp"
#include "bpmhd/spectral.hpp"

namespace bpmhd::testing {

/// Adaptive Simpson quadrature (used as the integral oracle for the stress
/// potential).
inline double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                               double tol, int depth = 24) {
    const double c = 0.5 * (a + b);
    const double fa = f(a), fb = f(b), fc = f(c);
    std::function<double(double, double, double, double, double, double, int)> rec =
        [&](double lo, double hi, double flo, double fhi, double fmid, double whole,
            int d) -> double {
        const double mid = 0.5 * (lo + hi);
        const double lm = 0.5 * (lo + mid), rm = 0.5 * (mid + hi);
        const double flm = f(lm), frm = f(rm);
        const double left = (mid - lo) / 6.0 * (flo + 4.0 * flm + fmid);
        const double right = (hi - mid) / 6.0 * (fmid + 4.0 * frm + fhi);
        if (d <= 0 || std::abs(left + right - whole) < 15.0 * tol)
            return left + right + (left + right - whole) / 15.0;
        return rec(lo, mid, flo, fmid, flm, left, d - 1) +
               rec(mid, hi, fmid, fhi, frm, right, d - 1);
    };
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fc + fb);
    return rec(a, b, fa, fb, fc, whole, depth);
}

/// Direct truncated convolution of (u . grad) v: for band-limited operands
/// this equals the dealiased pseudo-spectral product exactly.
inline SpectralField advect_direct(const SpectralField& u, const SpectralField& v) {
    const Grid& g = u.grid;
    const int n = g.dim();
    const int half = g.n() / 2;
    SpectralField out(g, n);
    const double ku = g.k_unit();
    const int kmax = g.dealias_kmax();

    // gather nonzero modes of u to keep the double loop tractable
    std::vector<size_t> supp;
    for (size_t idx = 0; idx < g.n_modes(); ++idx) {
        bool nz = false;
        for (int c = 0; c < n; ++c)
            if (u.at(c, idx) != cplx(0.0, 0.0)) nz = true;
        if (nz) supp.push_back(idx);
    }

    for (size_t kidx = 0; kidx < g.n_modes(); ++kidx) {
        auto mk = g.wavevector(kidx);
        bool keep = true;
        for (int d = 0; d < n; ++d)
            if (std::abs(mk[d]) > kmax) keep = false;
        if (!keep) continue;
        for (size_t pidx : supp) {
            auto mp = g.wavevector(pidx);
            std::array<int, 3> mq{0, 0, 0};
            bool in_lattice = true;
            for (int d = 0; d < n; ++d) {
                mq[d] = mk[d] - mp[d];
                if (mq[d] < -half || mq[d] >= half) in_lattice = false;
            }
            if (!in_lattice) continue;
            std::array<int, 3> iq{0, 0, 0};
            for (int d = 0; d < n; ++d) iq[d] = g.index_of(mq[d]);
            const size_t qidx = g.flat(iq[0], iq[1], iq[2]);
            for (int i = 0; i < n; ++i) {
                cplx acc(0.0, 0.0);
                for (int j = 0; j < n; ++j)
                    acc += u.at(j, pidx) * cplx(0.0, ku * mq[j]) * v.at(i, qidx);
                out.at(i, kidx) += acc;
            }
        }
    }
    return out;
}

inline std::mt19937_64 test_rng(uint64_t seed) { return std::mt19937_64(seed); }

inline SymTensor random_sym_tensor(std::mt19937_64& rng, int n, double scale = 1.0) {
    std::normal_distribution<double> g(0.0, scale);
    SymTensor t = SymTensor::zero(n);
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
            const double v = g(rng);
            t(i, j) = v;
            t(j, i) = v;
        }
    return t;
}

inline double rel_err(double got, double want) {
    const double scale = std::max(std::abs(want), 1e-300);
    return std::abs(got - want) / scale;
}

inline double field_rel_err(const SpectralField& got, const SpectralField& want) {
    double num = 0.0, den = 0.0;
    for (size_t i = 0; i < got.data.size(); ++i) {
        num += std::norm(got.data[i] - want.data[i]);
        den += std::norm(want.data[i]);
    }
    return std::sqrt(num / std::max(den, 1e-300));
}

}  // namespace bpmhd::testing
