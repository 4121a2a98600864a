"""p-Laplacian extension: flux-form discretization and p-Nehari tests.

The p = 2 case must reduce exactly to the base functional, and the
staggered-edge flux divergence is the exact discrete gradient of the
p-energy, so directional derivatives and the p-homogeneity identity
p J_p(u) - <J_p'(u), u> = int Q |u|^p hold to roundoff.
"""

import math

import numpy as np
import pytest

from logsolve import (
    Boundary,
    Field,
    Grid,
    PLapParams,
    SolverConfig,
    SplitParams,
    constant_descriptor,
    energy,
    gradient_field,
    inner,
    make_coefficients,
    nehari_scale,
    plap_descend,
    plap_energy,
    plap_fiber_value,
    plap_gradient,
    plap_nehari_project,
    plap_nehari_residual,
    plap_nehari_scale,
)
from logsolve.errors import ParameterError


def _setup(n=64, L=4.0, boundary=Boundary.PERIODIC):
    g = Grid(1, (n,), (L,), boundary)
    c = make_coefficients(
        {"V": constant_descriptor(0.2), "Q": constant_descriptor(1.1)}, g
    )
    return g, c


def _smooth_field(g, rng):
    # smooth random field bounded away from zero; |u|^{p-2} is then
    # well conditioned for finite differencing
    x = g.axes()[0]
    L = g.box[0]
    vals = 1.5 * np.ones(g.npoints)
    for k in (1, 2, 3):
        vals += 0.2 / k * (
            rng.uniform(-1, 1) * np.sin(2 * np.pi * k * x / L)
            + rng.uniform(-1, 1) * np.cos(2 * np.pi * k * x / L)
        )
    return Field(g, vals)


def test_params_validation():
    with pytest.raises(ParameterError):
        PLapParams(p=1.0)
    assert PLapParams(p=2.0).p == 2.0


def test_p2_reduces_to_base_energy():
    rng = np.random.default_rng(12)
    g, c = _setup()
    pp = PLapParams(p=2.0)
    for _ in range(5):
        u = Field(g, rng.standard_normal(g.npoints))
        bd = energy(u, c)
        assert plap_energy(u, c, pp) == pytest.approx(bd.j, rel=1e-13, abs=1e-13)
        gb = gradient_field(u, c)
        gp = plap_gradient(u, c, pp)
        assert np.allclose(gb.values, gp.values, rtol=1e-12, atol=1e-12)
        assert plap_nehari_residual(u, c, pp) == pytest.approx(
            bd.nehari_residual, rel=1e-12, abs=1e-12
        )


def test_p2_scale_matches_base():
    rng = np.random.default_rng(1)
    g, c = _setup()
    u = Field(g, 1.0 + 0.3 * rng.standard_normal(g.npoints))
    assert plap_nehari_scale(u, c, PLapParams(p=2.0)) == pytest.approx(
        nehari_scale(u, c, SplitParams()), rel=1e-13
    )


@pytest.mark.parametrize("p", [2.5, 3.0])
def test_gradient_directional_derivative(p):
    rng = np.random.default_rng(33)
    g, c = _setup()
    pp = PLapParams(p=p)
    u = _smooth_field(g, rng)
    v = Field(g, rng.standard_normal(g.npoints))
    eps = 1e-6
    jp = plap_energy(Field(g, u.values + eps * v.values), c, pp)
    jm = plap_energy(Field(g, u.values - eps * v.values), c, pp)
    fd = (jp - jm) / (2.0 * eps)
    assert inner(plap_gradient(u, c, pp), v) == pytest.approx(fd, rel=1e-6)


@pytest.mark.parametrize("p", [2.0, 2.5, 3.0])
def test_p_homogeneity_identity(p):
    # p J_p(u) - <J_p'(u), u> = int Q |u|^p, the p-analog of the
    # Nehari-defining identity
    rng = np.random.default_rng(44)
    g, c = _setup()
    pp = PLapParams(p=p)
    u = _smooth_field(g, rng)
    lhs = p * plap_energy(u, c, pp) - inner(plap_gradient(u, c, pp), u)
    q_mass = g.cell_volume * math.fsum(c.Q.values * np.abs(u.values) ** p)
    assert lhs == pytest.approx(q_mass, rel=1e-11)


@pytest.mark.parametrize("p", [2.0, 2.5, 3.0])
def test_projection_residual(p):
    rng = np.random.default_rng(55)
    g, c = _setup()
    pp = PLapParams(p=p)
    for _ in range(10):
        u = _smooth_field(g, rng)
        w = plap_nehari_project(u, c, pp)
        scale = max(abs(plap_energy(w, c, pp)), 1.0)
        assert abs(plap_nehari_residual(w, c, pp)) <= 1e-11 * scale


def test_fiber_maximum_at_p_scale():
    rng = np.random.default_rng(66)
    g, c = _setup()
    pp = PLapParams(p=2.5)
    u = _smooth_field(g, rng)
    s_star = plap_nehari_scale(u, c, pp)
    j_star = plap_fiber_value(u, c, pp, s_star)
    for s in np.geomspace(0.2 * s_star, 5.0 * s_star, 31):
        assert plap_fiber_value(u, c, pp, float(s)) <= j_star + 1e-12


def test_plap_descend_p2_matches_base_solution():
    g = Grid(1, (128,), (4.0,), Boundary.PERIODIC)
    c = make_coefficients(
        {
            "V": constant_descriptor(0.0),
            "Q": {
                "kind": "harmonic",
                "offset": 1.0,
                "terms": [{"axis": 0, "type": "cos", "amplitude": 0.3, "harmonic": 1}],
            },
        },
        g,
    )
    x = g.axes()[0]
    u0 = Field(g, np.exp(-2.0 * (x - 2.5) ** 2))
    cfg = SolverConfig(max_iters=1000, tol_residual=1e-8)
    u, rep = plap_descend(u0, c, PLapParams(p=2.0), cfg)
    assert rep.converged
    bd = energy(u, c)
    assert plap_energy(u, c, PLapParams(p=2.0)) == pytest.approx(bd.j, rel=1e-12)


def test_plap_descend_p3_converges():
    g = Grid(1, (128,), (4.0,), Boundary.PERIODIC)
    _, c = _setup(n=128)
    x = g.axes()[0]
    u0 = Field(g, np.exp(-2.0 * (x - 2.0) ** 2))
    cfg = SolverConfig(max_iters=2000, tol_residual=1e-7)
    u, rep = plap_descend(u0, c, PLapParams(p=3.0), cfg)
    assert rep.converged
    assert abs(plap_nehari_residual(u, c, PLapParams(p=3.0))) < 1e-9
