#pragma once

#include <string>
#include <vector>

namespace bpmhd {

/// Physical constants of the shear-thinning MHD model.
///
/// Stress law: T(E) = 2 mu0 (eps + |E|^2)^(-alpha/2) E - 2 mu1 Laplacian(E),
/// with alpha in [0,1) (shear thinning, p = 2 - alpha in (1,2]).
struct PhysicalParams {
    double eps = 1.0;     ///< stress regularizer (> 0)
    double mu0 = 1.0;     ///< consistency coefficient (> 0)
    double mu1 = 1.0;     ///< bipolar (higher-gradient) viscosity (> 0)
    double alpha = 0.5;   ///< shear-thinning exponent, in [0,1)
    double mu = 1.0;      ///< Lorentz / induction coupling (> 0)
    double s_diff = 1.0;  ///< magnetic diffusivity (> 0)
    double f_amp = 0.0;   ///< L2 norm of the steady body force (>= 0)
};

/// Periodic box [0,L)^dim sampled with `resolution` collocation points per axis.
struct DomainSpec {
    int dim = 2;             ///< spatial dimension, 2 or 3
    double length = 6.283185307179586476925286766559;  ///< period L (2*pi)
    int resolution = 64;     ///< modes per axis, even, >= 8

    double k_min() const { return 2.0 * 3.141592653589793238462643383279502884 / length; }
};

/// Domain-dependent constants consumed by the energy-estimate and
/// dimension-bound chains.  None of them is computable from first principles
/// for a general domain; defaults are documented placeholders (1.0), except
/// korn and lambda1 which can be auto-derived on the periodic box.
struct DomainConstants {
    double korn = 1.0;       ///< K: dissipation >= K * H2-norm^2 on div-free fields
    double embed = 1.0;      ///< C: embedding/interpolation constant
    double d_const = 1.0;    ///< d: W^{1,p} lower-bound constant
    double stokes_c = 1.0;   ///< c~: Stokes eigenvalue growth, lambda_j >= c~ lambda_1 j^n
    double lambda1 = 1.0;    ///< smallest eigenvalue of -Laplacian on mean-zero fields
    double c_tilde = 1.0;    ///< C~(alpha,eps): strain-integral bound constant
    double gronwall_rate_b = 0.0;  ///< rate in the ||b||_1^2 Gronwall step; 0 = derive from mu, embed, s_diff
};

/// Smallest eigenvalue of -Laplacian on mean-zero periodic fields: (2*pi/L)^2.
double lambda1(const DomainSpec& dom);

/// Fills lambda1 = k_min^2 and korn = discrete Korn constant for `dom`,
/// leaving the remaining constants at their placeholder defaults.
DomainConstants derive_constants(const DomainSpec& dom);

/// List of violated invariants; empty means all hold.
struct ValidationReport {
    std::vector<std::string> violations;
    bool ok() const { return violations.empty(); }
};

ValidationReport validate(const PhysicalParams& p, const DomainSpec& dom);

/// nu0 = min(mu1 * K, S) — the common coercivity rate of the energy estimate.
double nu0(const PhysicalParams& p, const DomainConstants& c);

/// nu1 = 4 / nu0, the forcing prefactor of the L2 Gronwall estimate.
double nu1(const PhysicalParams& p, const DomainConstants& c);

/// Squared radius of the absorbing ball in the L2 phase space:
/// rho1^2 = 2 nu1 |f|^2 / nu0.
double absorbing_radius_sq(const PhysicalParams& p, const DomainConstants& c);

/// Coefficient of ||b||_1^2 ||u||_2^2 in the magnetic uniform-Gronwall step.
/// Defaults to 8 (mu C)^2 / S; overridable through DomainConstants.
double gronwall_rate_b(const PhysicalParams& p, const DomainConstants& c);

/// Constants of the sliding-window estimate chain that yields the absorbing
/// ball in the stronger norm.  All evaluated at window length r:
///   kappa0 = (rho1^2 + 2 |f| rho1 r) / (2 nu0)
///   kappa1 = (nb kappa0 / r) exp(nb kappa0),           nb = gronwall_rate_b
///   kappa2 = kappa1 (nb kappa0 + 1) / S
///   kappa3 = kappa1 + (a3/r + a2) exp(a1) / (mu1 K)
///   rho2   = sqrt(kappa3)
/// with a1 = (8 C / mu1) kappa0, a2 = 8 C kappa1 kappa2,
/// a3 = rho1 (|f| + rho1) + (mu0 / eps^(alpha/2)) K kappa0 r.
struct KappaReport {
    double r = 0.0;
    double kappa0 = 0.0;
    double kappa1 = 0.0;
    double kappa2 = 0.0;
    double kappa3 = 0.0;
    double rho2 = 0.0;
};

/// Throws std::overflow_error ("estimate chain diverges for these parameters")
/// when the exponential factors leave double range.
KappaReport kappa_chain(const PhysicalParams& p, const DomainConstants& c, double r);

}  // namespace bpmhd
