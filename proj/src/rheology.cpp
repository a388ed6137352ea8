#include "bpmhd/rheology.hpp"

#include <cmath>

namespace bpmhd {

SymTensor operator+(const SymTensor& x, const SymTensor& y) {
    SymTensor r = x;
    for (size_t i = 0; i < r.a.size(); ++i) r.a[i] += y.a[i];
    return r;
}

SymTensor operator*(double s, const SymTensor& x) {
    SymTensor r = x;
    for (auto& v : r.a) v *= s;
    return r;
}

SymTensor strain_rate(const SymTensor& grad_u) {
    SymTensor e = SymTensor::zero(grad_u.n);
    for (int i = 0; i < e.n; ++i)
        for (int j = 0; j < e.n; ++j) e(i, j) = 0.5 * (grad_u(i, j) + grad_u(j, i));
    return e;
}

SymTensor strain_rate(int n, const double* g) {
    SymTensor e = SymTensor::zero(n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) e(i, j) = 0.5 * (g[i * n + j] + g[j * n + i]);
    return e;
}

double gamma_visc(double strain_sq, const PhysicalParams& p) {
    return p.mu0 * std::pow(p.eps + strain_sq, -p.alpha / 2.0);
}

double sigma_potential(double s, const PhysicalParams& p) {
    const double e = 1.0 - p.alpha / 2.0;
    return (2.0 * p.mu0 / (2.0 - p.alpha)) * (std::pow(p.eps + s, e) - std::pow(p.eps, e));
}

SymTensor newtonian_stress(const SymTensor& E, const PhysicalParams& p) {
    return (2.0 * gamma_visc(E.norm_sq(), p)) * E;
}

Rank4 linearized_moduli(const SymTensor& E, const PhysicalParams& p) {
    Rank4 A;
    A.n = E.n;
    const double w = p.mu0 * std::pow(p.eps + E.norm_sq(), -(1.0 + p.alpha / 2.0));
    for (int i = 0; i < E.n; ++i)
        for (int j = 0; j < E.n; ++j)
            for (int k = 0; k < E.n; ++k)
                for (int l = 0; l < E.n; ++l) A.at(i, j, k, l) = w * (E(i, j) * E(k, l));
    return A;
}

SymTensor moduli_apply(const SymTensor& E, const SymTensor& D, const PhysicalParams& p) {
    const double w = p.mu0 * std::pow(p.eps + E.norm_sq(), -(1.0 + p.alpha / 2.0));
    return (w * E.dot(D)) * E;
}

SymTensor gamma_stress_derivative(const SymTensor& E, const SymTensor& D,
                                  const PhysicalParams& p) {
    const SymTensor aD = moduli_apply(E, D, p);
    SymTensor r = gamma_visc(E.norm_sq(), p) * D;
    for (size_t i = 0; i < r.a.size(); ++i) r.a[i] -= p.alpha * aD.a[i];
    return r;
}

double coercivity_gap_pointwise(const SymTensor& Eb, const SymTensor& Ed,
                                const PhysicalParams& p) {
    const double G = p.eps + Eb.norm_sq();
    const double d2 = Ed.norm_sq();
    const double c = Eb.dot(Ed);
    const double lhs = gamma_visc(Eb.norm_sq(), p) * d2 -
                       p.alpha * p.mu0 * std::pow(G, -(1.0 + p.alpha / 2.0)) * c * c;
    const double denom = std::pow(G, 1.0 + p.alpha / 2.0);
    const double rhs1 = p.eps * p.alpha * p.mu0 * d2 / denom;
    const double rhs2 = (1.0 - p.alpha) * p.mu0 * c * c / denom;
    return lhs - rhs1 - rhs2;
}

}  // namespace bpmhd
