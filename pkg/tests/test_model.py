import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rubberfem.model import (Clamped, Constant, Linear, PhysicalParameters, Tabulated,
                             default_rubber_parameters, eval_b, eval_sigma, nondimensionalize,
                             parse_coefficient, validate_assumptions)


@pytest.fixture
def rubber():
    return nondimensionalize(default_rubber_parameters())


def unit_params(**kw):
    base = dict(D=1.0, beta=1.0, H=1.0, a0=1.0, s0=1.0, m0=1.0, L=10.0, Tf=1.0,
                b_fn=Constant(1.0), sigma_fn=Constant(0.0))
    base.update(kw)
    return PhysicalParameters(**base)


def test_rubber_groups(rubber):
    assert rubber.Bi == pytest.approx(0.564 * 0.01 / 3.66e-4, rel=1e-14)
    assert rubber.Bi == pytest.approx(15.40984, abs=5e-6)
    assert rubber.A0 == pytest.approx(136.61202, abs=5e-6)
    assert rubber.T == pytest.approx(36.6, rel=1e-12)
    assert rubber.h_max == pytest.approx(100.0)


def test_unit_scales():
    d = nondimensionalize(unit_params())
    assert (d.Bi, d.A0, d.T) == (1.0, 1.0, 1.0)


def test_scaled_coefficients(rubber):
    assert eval_sigma(rubber, 1.0) == pytest.approx(0.01, rel=1e-12)
    assert eval_sigma(rubber, -1.0) == 0.0
    for tau in np.linspace(0.0, rubber.T, 7):
        assert eval_b(rubber, tau) == pytest.approx(10.0, rel=1e-14)
    with pytest.raises(ValueError):
        eval_b(rubber, rubber.T * 1.01)


def test_dimensions_cancel():
    # (mm, min, g) exponents; a0 from ds/dt = a0 (m - sigma)
    dims = {"D": (2, -1, 0), "beta": (1, -1, 0), "s0": (1, 0, 0), "a0": (4, -1, -1),
            "m0": (-3, 0, 1), "Tf": (0, 1, 0)}

    def combine(**powers):
        return tuple(sum(p * dims[k][i] for k, p in powers.items()) for i in range(3))

    assert combine(beta=1, s0=1, D=-1) == (0, 0, 0)
    assert combine(a0=1, m0=1, s0=1, D=-1) == (0, 0, 0)
    assert combine(D=1, Tf=1, s0=-2) == (0, 0, 0)


@settings(max_examples=40, deadline=None)
@given(c=st.floats(0.01, 100.0), c_t=st.floats(0.01, 100.0))
def test_scale_consistency(c, c_t):
    p = default_rubber_parameters()
    q = PhysicalParameters(D=c * p.D, beta=c * p.beta, H=p.H, a0=c * p.a0, s0=p.s0, m0=p.m0,
                           L=p.L, Tf=c_t * p.Tf, b_fn=p.b_fn, sigma_fn=p.sigma_fn)
    a, b = nondimensionalize(p), nondimensionalize(q)
    assert b.Bi == pytest.approx(a.Bi, rel=1e-14)
    assert b.A0 == pytest.approx(a.A0, rel=1e-14)
    assert b.T == pytest.approx(a.T * c * c_t, rel=1e-14)


@pytest.mark.parametrize("field,value", [("D", 0.0), ("beta", -1.0), ("m0", math.nan),
                                         ("s0", 20.0)])
def test_physical_validation(field, value):
    with pytest.raises(ValueError):
        unit_params(**{field: value})


def test_rubber_assumptions_warn_once(rubber):
    report = validate_assumptions(rubber)
    assert report.passed
    assert len(report.warnings) == 1
    assert "plateau" in report.warnings[0]


def test_zero_exterior_violates_positivity():
    d = nondimensionalize(unit_params(b_fn=Constant(0.0)))
    report = validate_assumptions(d)
    assert not report.passed
    assert any(aid == "A2" for aid, _ in report.violations)


def test_initial_data_on_upper_bound_passes():
    p = unit_params(H=2.5, b_fn=Constant(1.0), sigma_fn=Constant(0.0))
    d = nondimensionalize(p, Constant(1.0 / 2.5))
    assert validate_assumptions(d).passed


def test_initial_data_above_bound_fails():
    d = nondimensionalize(unit_params(H=2.5), Constant(0.5))
    assert any(aid == "A5" for aid, _ in validate_assumptions(d).violations)


def test_decreasing_sigma_fails():
    d = nondimensionalize(unit_params(sigma_fn=Linear(-0.01, 0.1)), Constant(0.2))
    assert not validate_assumptions(d).passed


def test_plateau_checks():
    p = default_rubber_parameters()
    clamped = PhysicalParameters(**{**p.__dict__, "sigma_fn": Clamped(p.sigma_fn, 0.015)})
    report = validate_assumptions(nondimensionalize(clamped))
    assert report.passed
    too_high = PhysicalParameters(**{**p.__dict__, "sigma_fn": Clamped(p.sigma_fn, 0.5)})
    assert not validate_assumptions(nondimensionalize(too_high)).passed


def test_validation_is_total():
    def broken(x):
        raise RuntimeError("boom")

    d = nondimensionalize(unit_params())
    from dataclasses import replace

    report = validate_assumptions(replace(d, sigma_scaled=broken, Bi=math.inf))
    assert not report.passed
    assert validate_assumptions(d).passed == validate_assumptions(d).passed


@pytest.mark.parametrize("text,x,expected", [
    ("constant(1.0)", 3.0, 1.0),
    ("linear(0.1)", 2.0, 0.2),
    ("linear(0.5, 1)", 2.0, 2.0),
    ("table(0:1, 2:3)", 1.0, 2.0),
    ("table(0:1, 2:3)", 5.0, 3.0),
])
def test_parse_coefficient(text, x, expected):
    assert parse_coefficient(text)(x) == pytest.approx(expected)


@pytest.mark.parametrize("text", ["cubic(1)", "constant()", "linear(1,2,3)", "table(1)",
                                  "table(1:0, 0:1)", "1.0"])
def test_parse_coefficient_rejects(text):
    with pytest.raises(ValueError):
        parse_coefficient(text)


def test_coefficients_vectorize():
    xs = np.linspace(0, 2, 5)
    for f in (Constant(2.0), Linear(1.0), Tabulated(((0.0, 0.0), (1.0, 1.0))), Clamped(Linear(1.0), 1.0)):
        out = f(xs)
        assert out.shape == xs.shape
        assert all(out[i] == pytest.approx(f(float(x))) for i, x in enumerate(xs))
