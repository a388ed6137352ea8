#pragma once

#include <array>
#include <cstddef>

#include "bpmhd/params.hpp"

namespace bpmhd {

/// Symmetric n x n tensor (n = 2 or 3), stored dense.  Used pointwise for the
/// strain rate E(u) and for stresses derived from it.
struct SymTensor {
    int n = 2;
    std::array<double, 9> a{};  // row-major, only the leading n x n block is used

    double& operator()(int i, int j) { return a[static_cast<size_t>(3 * i + j)]; }
    double operator()(int i, int j) const { return a[static_cast<size_t>(3 * i + j)]; }

    static SymTensor zero(int n) { return SymTensor{n, {}}; }

    /// Frobenius inner product sum_ij A_ij B_ij.
    double dot(const SymTensor& o) const {
        double s = 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) s += (*this)(i, j) * o(i, j);
        return s;
    }
    double norm_sq() const { return dot(*this); }
    double trace() const {
        double s = 0.0;
        for (int i = 0; i < n; ++i) s += (*this)(i, i);
        return s;
    }
};

SymTensor operator+(const SymTensor& x, const SymTensor& y);
SymTensor operator*(double s, const SymTensor& x);

/// Symmetric part of a velocity gradient: E = (G + G^T) / 2.
SymTensor strain_rate(const SymTensor& grad_u);
SymTensor strain_rate(int n, const double* grad_row_major);

/// Effective viscosity Gamma(s) = mu0 (eps + s)^(-alpha/2), s = |E|^2.
/// Strictly positive, nonincreasing in s, bounded by mu0 eps^(-alpha/2).
double gamma_visc(double strain_sq, const PhysicalParams& p);

/// Potential Sigma(s) = integral_0^s Gamma(sigma) dsigma, closed form
/// (2 mu0 / (2 - alpha)) [ (eps + s)^(1 - alpha/2) - eps^(1 - alpha/2) ].
/// Sigma(0) = 0 and Sigma'(s) = gamma_visc(s).
double sigma_potential(double s, const PhysicalParams& p);

/// Algebraic part of the stress law: 2 Gamma(|E|^2) E.
SymTensor newtonian_stress(const SymTensor& E, const PhysicalParams& p);

/// Rank-4 linearization tensor
///   A_ijkl = mu0 (eps + |E|^2)^(-(1 + alpha/2)) E_ij E_kl,
/// with minor symmetries (ij), (kl) and major symmetry (ij)<->(kl).
struct Rank4 {
    int n = 2;
    std::array<double, 81> a{};  // [((i*3 + j)*3 + k)*3 + l]

    double& at(int i, int j, int k, int l) {
        return a[static_cast<size_t>(((i * 3 + j) * 3 + k) * 3 + l)];
    }
    double at(int i, int j, int k, int l) const {
        return a[static_cast<size_t>(((i * 3 + j) * 3 + k) * 3 + l)];
    }
};

Rank4 linearized_moduli(const SymTensor& E_base, const PhysicalParams& p);

/// Contraction (A(E_base) : D)_ij = A_ijkl D_kl
///            = mu0 (eps + |E_base|^2)^(-(1+alpha/2)) (E_base : D) E_base.
SymTensor moduli_apply(const SymTensor& E_base, const SymTensor& D, const PhysicalParams& p);

/// Directional derivative of the map E -> Gamma(|E|^2) E at E_base in
/// direction D:  Gamma(E_base) D - alpha A(E_base) : D.
SymTensor gamma_stress_derivative(const SymTensor& E_base, const SymTensor& D,
                                  const PhysicalParams& p);

/// Pointwise coercivity margin of the linearized stress:
///   Gamma |D|^2 - alpha (A : D) : D
///     - eps alpha mu0 |D|^2 / G^(1+alpha/2)
///     - (1 - alpha) mu0 (E_base : D)^2 / G^(1+alpha/2),
/// with G = eps + |E_base|^2.  Nonnegative for alpha in [0,1).
double coercivity_gap_pointwise(const SymTensor& E_base, const SymTensor& E_dir,
                                const PhysicalParams& p);

}  // namespace bpmhd
