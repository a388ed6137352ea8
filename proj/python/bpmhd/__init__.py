"""Pseudo-spectral shear-thinning MHD solver and attractor-analysis toolkit."""

from ._core import (
    DimensionBoundReport,
    DomainConstants,
    DomainSpec,
    KappaReport,
    PhysicalParams,
    absorbing_radius_sq,
    delta_prime,
    derive_constants,
    dimension_bound,
    discrete_korn,
    gamma_prime,
    gamma_visc,
    gronwall_envelope,
    kappa_chain,
    lambda1,
    lambda_big,
    nu0,
    nu1,
    run_energy_series,
    sigma_potential,
    validate,
)

__all__ = [
    "DimensionBoundReport",
    "DomainConstants",
    "DomainSpec",
    "KappaReport",
    "PhysicalParams",
    "absorbing_radius_sq",
    "delta_prime",
    "derive_constants",
    "dimension_bound",
    "discrete_korn",
    "gamma_prime",
    "gamma_visc",
    "gronwall_envelope",
    "kappa_chain",
    "lambda1",
    "lambda_big",
    "nu0",
    "nu1",
    "run_energy_series",
    "sigma_potential",
    "validate",
]
