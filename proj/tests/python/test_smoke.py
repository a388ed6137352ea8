"""Smoke tests for the python bindings (run via ctest with PYTHONPATH set,
or `pytest tests/python` after an editable install)."""

import math
import sys

import bpmhd


def test_validate_defaults():
    p = bpmhd.PhysicalParams()
    d = bpmhd.DomainSpec()
    assert bpmhd.validate(p, d) == []
    p.alpha = 1.0
    assert "alpha must be < 1" in bpmhd.validate(p, d)


def test_domain_constants():
    d = bpmhd.DomainSpec()
    d.resolution = 32
    assert abs(bpmhd.lambda1(d) - 1.0) < 1e-14
    c = bpmhd.derive_constants(d)
    assert abs(c.korn - 1.0 / 6.0) < 1e-14
    assert abs(bpmhd.discrete_korn(d) - c.korn) < 1e-16


def test_estimate_chain():
    p = bpmhd.PhysicalParams()
    c = bpmhd.DomainConstants()
    assert bpmhd.nu0(p, c) == 1.0
    assert bpmhd.nu1(p, c) == 4.0
    p.f_amp = 1.0
    assert abs(bpmhd.absorbing_radius_sq(p, c) - 8.0) < 1e-14
    k = bpmhd.kappa_chain(p, c, 1.0)
    assert k.kappa0 > 0 and math.isfinite(k.kappa3)
    assert k.rho2 >= math.sqrt(k.kappa1)


def test_dimension_bound():
    p = bpmhd.PhysicalParams()
    p.alpha = 0.5
    c = bpmhd.DomainConstants()
    p.f_amp = 0.0
    r = bpmhd.dimension_bound(p, c, 2)
    assert r.m_bound == 1
    p.f_amp = 2.0
    r2 = bpmhd.dimension_bound(p, c, 2)
    assert r2.m_bound >= r.m_bound
    assert abs(bpmhd.delta_prime(0.0) - 1.0) < 1e-15
    p.alpha = 0.0
    r3 = bpmhd.dimension_bound(p, c, 2)
    assert r3.alpha_zero_branch


def test_rheology_scalars():
    p = bpmhd.PhysicalParams()
    p.alpha = 0.0
    p.mu0 = 3.0
    assert abs(bpmhd.gamma_visc(5.0, p) - 3.0) < 1e-15
    assert abs(bpmhd.sigma_potential(2.0, p) - 6.0) < 1e-14


def test_decay_run_is_monotone():
    p = bpmhd.PhysicalParams()
    p.alpha = 0.4
    d = bpmhd.DomainSpec()
    d.resolution = 32
    rows = bpmhd.run_energy_series(p, d, 2e-3, 100, stride=10, seed=3, init_amplitude=0.5)
    ys = [y for (_, y, _) in rows]
    assert all(b < a for a, b in zip(ys, ys[1:]))
    diss = [q for (_, _, q) in rows]
    assert all(q >= 0 for q in diss)


def test_forced_run_stays_bounded():
    p = bpmhd.PhysicalParams()
    d = bpmhd.DomainSpec()
    d.resolution = 32
    rows = bpmhd.run_energy_series(
        p, d, 2e-3, 400, stride=40, seed=5, init_amplitude=0.1, forcing_amplitude=0.4
    )
    c = bpmhd.DomainConstants()
    c.korn = bpmhd.discrete_korn(d)
    p.f_amp = 0.4
    ball = bpmhd.absorbing_radius_sq(p, c)
    assert all(y <= ball for (_, y, _) in rows)


def main():
    tests = [v for k, v in sorted(globals().items()) if k.startswith("test_")]
    failed = 0
    for t in tests:
        try:
            t()
            print(f"PASS {t.__name__}")
        except AssertionError as e:
            failed += 1
            print(f"FAIL {t.__name__}: {e}")
    if failed:
        sys.exit(1)


if __name__ == "__main__":
    main()
