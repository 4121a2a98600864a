"""Fiber map and Nehari projection tests.

The discrete fiber map is exactly the continuous one,
phi(s) = J(u) s^2 - s^2 log s * int Q u^2, so the projection scale
s* = exp(J(u)/int Q u^2 - 1/2) is closed form and the residual after
projection is limited only by roundoff.
"""

import math

import numpy as np
import pytest

from logsolve import (
    Boundary,
    Field,
    Grid,
    SplitParams,
    constant_descriptor,
    energy,
    fiber_report,
    fiber_value,
    make_coefficients,
    nehari_project,
    nehari_scale,
)
from logsolve.errors import NonpositiveScaleError, ZeroFieldError
from logsolve.nehari import on_nehari_identity_gap


def _setup(n=64, L=4.0, v0=0.1, q0=1.2):
    g = Grid(1, (n,), (L,), Boundary.PERIODIC)
    c = make_coefficients(
        {"V": constant_descriptor(v0), "Q": constant_descriptor(q0)}, g
    )
    return g, c


def test_constant_field_scale_is_one():
    # u = 1 with V = 0, Q = 1: J = L/2, int Q u^2 = L, so
    # s* = exp(1/2 - 1/2) = 1 and u is already on the manifold
    g = Grid(1, (64,), (4.0,), Boundary.PERIODIC)
    c = make_coefficients(
        {"V": constant_descriptor(0.0), "Q": constant_descriptor(1.0)}, g
    )
    u = Field(g, np.ones(64))
    p = SplitParams()
    assert nehari_scale(u, c, p) == pytest.approx(1.0, rel=1e-14)


def test_projection_residual_machine_precision():
    rng = np.random.default_rng(17)
    g, c = _setup()
    p = SplitParams()
    for _ in range(20):
        u = Field(g, rng.standard_normal(g.npoints))
        w = nehari_project(u, c, p)
        bd = energy(w, c, p)
        scale = max(bd.quad, abs(bd.logterm), 1.0)
        assert abs(bd.nehari_residual) <= 1e-12 * scale


def test_fiber_maximum_at_scale():
    rng = np.random.default_rng(2)
    g, c = _setup()
    p = SplitParams()
    u = Field(g, 1.0 + 0.5 * rng.standard_normal(g.npoints))
    s_star = nehari_scale(u, c, p)
    j_star = fiber_value(u, c, p, s_star)
    for s in np.geomspace(0.1 * s_star, 10.0 * s_star, 41):
        assert fiber_value(u, c, p, float(s)) <= j_star + 1e-12


def test_fiber_value_matches_energy_of_scaled_field():
    rng = np.random.default_rng(6)
    g, c = _setup()
    p = SplitParams()
    u = Field(g, rng.standard_normal(g.npoints))
    for s in (0.3, 1.0, 2.7):
        direct = energy(Field(g, s * u.values), c, p).j
        assert fiber_value(u, c, p, s) == pytest.approx(direct, rel=1e-12)


def test_ray_invariance_of_scale():
    # s*(c u) * c = s*(u): the projected field does not depend on where
    # along the ray you start
    rng = np.random.default_rng(13)
    g, c = _setup()
    p = SplitParams()
    u = Field(g, rng.standard_normal(g.npoints))
    s_u = nehari_scale(u, c, p)
    for cval in (0.05, 0.8, 12.0):
        s_cu = nehari_scale(Field(g, cval * u.values), c, p)
        assert s_cu * cval == pytest.approx(s_u, rel=1e-12)


def test_on_nehari_identity():
    # on the manifold, 2 J(u) - <J'(u), u> = int Q u^2
    rng = np.random.default_rng(8)
    g, c = _setup()
    p = SplitParams()
    u = nehari_project(Field(g, rng.standard_normal(g.npoints)), c, p)
    bd = energy(u, c, p)
    assert on_nehari_identity_gap(bd) == pytest.approx(0.0, abs=1e-12 * bd.q_mass)
    assert 2.0 * bd.j == pytest.approx(bd.q_mass, rel=1e-12)


def test_fiber_report_brackets_the_peak():
    g, c = _setup()
    p = SplitParams()
    x = g.axes()[0]
    u = Field(g, 1.0 + 0.3 * np.sin(2.0 * np.pi * x / 4.0))
    rep = fiber_report(u, c, p)
    values = [v for _, v in rep.phi_samples]
    assert rep.j_at_star >= max(values) - 1e-12


def test_degenerate_inputs():
    g, c = _setup()
    p = SplitParams()
    with pytest.raises(ZeroFieldError):
        nehari_scale(Field(g, np.zeros(g.npoints)), c, p)
    u = Field(g, np.ones(g.npoints))
    with pytest.raises(NonpositiveScaleError):
        fiber_value(u, c, p, -1.0)
    with pytest.raises(NonpositiveScaleError):
        fiber_value(u, c, p, 0.0)
