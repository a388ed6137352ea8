#pragma once

// Internal helpers shared by the dynamics and tangent right-hand sides:
// collocation strain evaluation, the Gamma-stress divergence and its
// linearization, and the constant-coefficient stiff symbols.

#include <cmath>
#include <utility>
#include <vector>

#include "bpmhd/params.hpp"
#include "bpmhd/rheology.hpp"
#include "bpmhd/spectral.hpp"

namespace bpmhd::detail {

inline std::vector<std::pair<int, int>> sym_pairs(int n) {
    std::vector<std::pair<int, int>> p;
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) p.emplace_back(i, j);
    return p;
}

/// Collocation values of the strain-rate components E_ij(u), upper triangle.
inline RealField strain_real(const SpectralField& u) {
    const Grid& g = u.grid;
    const auto pairs = sym_pairs(g.dim());
    SpectralField es(g, static_cast<int>(pairs.size()));
    const double ku = g.k_unit();
    for (size_t idx = 0; idx < g.n_modes(); ++idx) {
        auto m = g.wavevector(idx);
        for (size_t a = 0; a < pairs.size(); ++a) {
            const auto [i, j] = pairs[a];
            es.at(static_cast<int>(a), idx) =
                cplx(0.0, 0.5) * (ku * m[i] * u.at(j, idx) + ku * m[j] * u.at(i, idx));
        }
    }
    return to_real(es);
}

/// |E|^2 per grid point (off-diagonal entries counted twice).
inline std::vector<double> strain_sq(const RealField& er, int dim) {
    const auto pairs = sym_pairs(dim);
    const size_t nm = er.grid.n_modes();
    std::vector<double> s(nm, 0.0);
    for (size_t a = 0; a < pairs.size(); ++a) {
        const double w = pairs[a].first == pairs[a].second ? 1.0 : 2.0;
        const double* e = er.values.data() + a * nm;
        for (size_t x = 0; x < nm; ++x) s[x] += w * e[x] * e[x];
    }
    return s;
}

/// Frobenius product of two symmetric fields stored as upper triangles.
inline std::vector<double> strain_dot(const RealField& a, const RealField& b, int dim) {
    const auto pairs = sym_pairs(dim);
    const size_t nm = a.grid.n_modes();
    std::vector<double> s(nm, 0.0);
    for (size_t c = 0; c < pairs.size(); ++c) {
        const double w = pairs[c].first == pairs[c].second ? 1.0 : 2.0;
        const double* pa = a.values.data() + c * nm;
        const double* pb = b.values.data() + c * nm;
        for (size_t x = 0; x < nm; ++x) s[x] += w * pa[x] * pb[x];
    }
    return s;
}

/// Divergence of a symmetric tensor field given as band-limited collocation
/// components (upper triangle): (Div T)_i = sum_j d_j T_ij.
inline SpectralField sym_divergence(const RealField& t, int dim) {
    const Grid& g = t.grid;
    SpectralField t_hat = from_real(t);
    dealias_inplace(t_hat);
    const auto pairs = sym_pairs(dim);
    int comp_of[3][3] = {};
    for (size_t a = 0; a < pairs.size(); ++a) {
        comp_of[pairs[a].first][pairs[a].second] = static_cast<int>(a);
        comp_of[pairs[a].second][pairs[a].first] = static_cast<int>(a);
    }
    SpectralField div(g, dim);
    const double ku = g.k_unit();
    for (size_t idx = 0; idx < g.n_modes(); ++idx) {
        auto m = g.wavevector(idx);
        for (int i = 0; i < dim; ++i) {
            cplx acc(0.0, 0.0);
            for (int j = 0; j < dim; ++j)
                acc += cplx(0.0, ku * m[j]) * t_hat.at(comp_of[i][j], idx);
            div.at(i, idx) = acc;
        }
    }
    return div;
}

/// Div(Gamma(u) E(u)) — the algebraic stress term of the weak form.
inline SpectralField gamma_stress_divergence(const SpectralField& u, const PhysicalParams& p) {
    const Grid& g = u.grid;
    const size_t nm = g.n_modes();
    RealField er = strain_real(u);
    const std::vector<double> s = strain_sq(er, g.dim());
    const auto pairs = sym_pairs(g.dim());
    for (size_t a = 0; a < pairs.size(); ++a) {
        double* e = er.values.data() + a * nm;
        for (size_t x = 0; x < nm; ++x) e[x] *= gamma_visc(s[x], p);
    }
    return sym_divergence(er, g.dim());
}

/// Div( Gamma(u) E(xi) - alpha A(u):E(xi) ) — the exact linearization of
/// gamma_stress_divergence at u in direction xi.
inline SpectralField linearized_stress_divergence(const SpectralField& u,
                                                  const SpectralField& xi,
                                                  const PhysicalParams& p) {
    const Grid& g = u.grid;
    const size_t nm = g.n_modes();
    const RealField eu = strain_real(u);
    RealField exi = strain_real(xi);
    const std::vector<double> su = strain_sq(eu, g.dim());
    const std::vector<double> cross = strain_dot(eu, exi, g.dim());
    const auto pairs = sym_pairs(g.dim());
    for (size_t a = 0; a < pairs.size(); ++a) {
        double* t = exi.values.data() + a * nm;
        const double* ebase = eu.values.data() + a * nm;
        for (size_t x = 0; x < nm; ++x) {
            const double G = p.eps + su[x];
            const double gam = p.mu0 * std::pow(G, -p.alpha / 2.0);
            const double w = p.mu0 * std::pow(G, -(1.0 + p.alpha / 2.0));
            t[x] = gam * t[x] - p.alpha * w * cross[x] * ebase[x];
        }
    }
    return sym_divergence(exi, g.dim());
}

/// Constant-coefficient stiff decay symbols: (mu1/2)|k|^4 for u, S|k|^2 for b.
struct StiffSymbols {
    std::vector<double> lam_u, lam_b;
    StiffSymbols(const Grid& g, const PhysicalParams& p)
        : lam_u(g.n_modes()), lam_b(g.n_modes()) {
        const double ku2 = g.k_unit() * g.k_unit();
        for (size_t idx = 0; idx < g.n_modes(); ++idx) {
            auto m = g.wavevector(idx);
            double m2 = 0.0;
            for (int d = 0; d < g.dim(); ++d) m2 += static_cast<double>(m[d]) * m[d];
            const double k2 = ku2 * m2;
            lam_u[idx] = 0.5 * p.mu1 * k2 * k2;
            lam_b[idx] = p.s_diff * k2;
        }
    }
};

}  // namespace bpmhd::detail
