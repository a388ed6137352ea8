#include "bpmhd/params.hpp"

#include <cmath>
#include <stdexcept>

#include "bpmhd/spectral.hpp"

namespace bpmhd {

double lambda1(const DomainSpec& dom) {
    const double k = dom.k_min();
    return k * k;
}

DomainConstants derive_constants(const DomainSpec& dom) {
    DomainConstants c;
    c.lambda1 = lambda1(dom);
    c.korn = discrete_korn(dom);
    return c;
}

ValidationReport validate(const PhysicalParams& p, const DomainSpec& dom) {
    ValidationReport rep;
    auto require = [&rep](bool ok, const char* msg) {
        if (!ok) rep.violations.emplace_back(msg);
    };
    require(p.eps > 0.0, "eps must be > 0");
    require(p.mu0 > 0.0, "mu0 must be > 0");
    require(p.mu1 > 0.0, "mu1 must be > 0");
    require(p.mu > 0.0, "mu must be > 0");
    require(p.s_diff > 0.0, "s_diff must be > 0");
    require(p.alpha >= 0.0, "alpha must be >= 0");
    require(p.alpha < 1.0, "alpha must be < 1");
    require(p.f_amp >= 0.0, "f_amp must be >= 0");
    require(dom.dim == 2 || dom.dim == 3, "dim must be 2 or 3");
    require(dom.length > 0.0, "length must be > 0");
    require(dom.resolution >= 8, "resolution must be >= 8");
    require(dom.resolution % 2 == 0, "resolution must be even");
    return rep;
}

double nu0(const PhysicalParams& p, const DomainConstants& c) {
    return std::min(p.mu1 * c.korn, p.s_diff);
}

double nu1(const PhysicalParams& p, const DomainConstants& c) { return 4.0 / nu0(p, c); }

double absorbing_radius_sq(const PhysicalParams& p, const DomainConstants& c) {
    return 2.0 * nu1(p, c) * p.f_amp * p.f_amp / nu0(p, c);
}

double gronwall_rate_b(const PhysicalParams& p, const DomainConstants& c) {
    if (c.gronwall_rate_b > 0.0) return c.gronwall_rate_b;
    const double mc = p.mu * c.embed;
    return 8.0 * mc * mc / p.s_diff;
}

KappaReport kappa_chain(const PhysicalParams& p, const DomainConstants& c, double r) {
    if (!(r > 0.0)) throw std::invalid_argument("kappa_chain: window r must be > 0");

    KappaReport k;
    k.r = r;
    const double n0 = nu0(p, c);
    const double rho1_sq = absorbing_radius_sq(p, c);
    const double rho1 = std::sqrt(rho1_sq);
    const double f = p.f_amp;

    k.kappa0 = (rho1_sq + 2.0 * f * rho1 * r) / (2.0 * n0);

    const double nb = gronwall_rate_b(p, c);
    k.kappa1 = (nb * k.kappa0 / r) * std::exp(nb * k.kappa0);
    k.kappa2 = k.kappa1 * (nb * k.kappa0 + 1.0) / p.s_diff;

    const double a1 = (8.0 * c.embed / p.mu1) * k.kappa0;
    const double a2 = 8.0 * c.embed * k.kappa1 * k.kappa2;
    const double a3 =
        rho1 * (f + rho1) + (p.mu0 / std::pow(p.eps, p.alpha / 2.0)) * c.korn * k.kappa0 * r;
    k.kappa3 = k.kappa1 + (a3 / r + a2) * std::exp(a1) / (p.mu1 * c.korn);
    k.rho2 = std::sqrt(k.kappa3);

    if (!std::isfinite(k.kappa1) || !std::isfinite(k.kappa2) || !std::isfinite(k.kappa3))
        throw std::overflow_error("estimate chain diverges for these parameters");
    return k;
}

}  // namespace bpmhd
