"""p-Laplacian extension of the logarithmic problem.

J_p(u) = 1/p int (|grad u|^p + (V+Q)|u|^p) - 1/p int Q |u|^p log |u|^p.

The gradient part is discretized axis-by-axis on staggered edges
(|D_a u|^p per edge), so the discrete divergence of the edge flux
|D_a u|^{p-2} D_a u is the exact adjoint of the energy and all the
duality identities of the p = 2 module carry over verbatim:

    p J_p(u) - <J_p'(u), u> = int Q |u|^p,
    J_p(su) = s^p J_p(u) - s^p log s * int Q |u|^p,
    s*      = exp(J_p(u) / int Q |u|^p - 1/p).

For p < 2 the flux degenerates where an edge gradient vanishes; it is
regularized by |d|^{p-2} -> (d^2 + eps^2)^{(p-2)/2} with eps = 1e-8.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .coefficients import Coefficients
from .errors import ParameterError, ZeroFieldError
from .lattice import (
    Boundary,
    Field,
    check_same_grid,
    edge_differences,
    exact_sum,
)
from .solver import SolverConfig, projected_descent


@dataclass(frozen=True)
class PLapParams:
    """Exponent of the p-Laplacian; p in (1, inf) with N = 1, 2.

    The underlying analysis assumes 1 < p < N; desk-scale dimensions
    make that range empty or trivial, so any p > 1 is accepted here.
    """

    p: float
    eps_reg: float = 1e-8

    def __post_init__(self):
        if self.p <= 1.0:
            raise ParameterError("p-Laplacian exponent must satisfy p > 1")
        if self.eps_reg <= 0.0:
            raise ParameterError("degeneracy regularization must be positive")


def _abs_pow_log(u: np.ndarray, p: float):
    """(|u|^p, |u|^p log |u|^p) with the zero extension at u = 0."""
    out_pow = np.zeros_like(u)
    out_log = np.zeros_like(u)
    nz = u != 0.0
    a = np.abs(u[nz])
    ap = a**p
    out_pow[nz] = ap
    out_log[nz] = ap * p * np.log(a)
    return out_pow, out_log


def _edge_flux(d: np.ndarray, pp: PLapParams) -> np.ndarray:
    """phi(d) = |d|^{p-2} d on edges, regularized when p < 2."""
    if pp.p >= 2.0:
        return np.abs(d) ** (pp.p - 2.0) * d
    return (d * d + pp.eps_reg**2) ** ((pp.p - 2.0) / 2.0) * d


def plap_quadratic_part(u: Field, c: Coefficients, pp: PLapParams) -> float:
    """int (|grad_h u|^p + (V+Q)|u|^p) with per-axis edge gradients."""
    grid = check_same_grid(u, c.V, c.Q)
    vol = grid.cell_volume
    grad_term = 0.0
    for ax in range(grid.dim):
        d = edge_differences(u, ax)
        grad_term += exact_sum(np.abs(d) ** pp.p)
    upow, _ = _abs_pow_log(u.values, pp.p)
    mass = exact_sum((c.V.values + c.Q.values) * upow)
    return vol * (grad_term + mass)


def plap_q_mass(u: Field, c: Coefficients, pp: PLapParams) -> float:
    """int Q |u|^p."""
    check_same_grid(u, c.Q)
    upow, _ = _abs_pow_log(u.values, pp.p)
    return u.grid.cell_volume * exact_sum(c.Q.values * upow)


def plap_log_term(u: Field, c: Coefficients, pp: PLapParams) -> float:
    """int Q |u|^p log |u|^p."""
    check_same_grid(u, c.Q)
    _, ulog = _abs_pow_log(u.values, pp.p)
    return u.grid.cell_volume * exact_sum(c.Q.values * ulog)


def plap_energy(u: Field, c: Coefficients, pp: PLapParams) -> float:
    """Value of the p-logarithmic functional J_p."""
    quad = plap_quadratic_part(u, c, pp)
    return (quad - plap_log_term(u, c, pp)) / pp.p


def plap_gradient(u: Field, c: Coefficients, pp: PLapParams) -> Field:
    """Strong-form residual -Lap_p u + V|u|^{p-2}u - Q|u|^{p-2}u log|u|^p.

    The divergence is taken in flux form on the same staggered edges as
    the energy, so <plap_gradient(u), v> is the exact directional
    derivative of plap_energy for p >= 2.
    """
    grid = check_same_grid(u, c.V, c.Q)
    div = np.zeros(grid.cells)
    for ax, h in enumerate(grid.spacing):
        flux = _edge_flux(edge_differences(u, ax), pp)
        if grid.boundary is Boundary.PERIODIC:
            div += (np.roll(flux, 1, axis=ax) - flux) / h
        else:
            lo = [slice(None)] * grid.dim
            hi = [slice(None)] * grid.dim
            lo[ax] = slice(None, -1)
            hi[ax] = slice(1, None)
            div += (flux[tuple(lo)] - flux[tuple(hi)]) / h
    upow, _ = _abs_pow_log(u.values, pp.p)
    uabs_p2u = np.where(u.values != 0.0, upow / np.where(u.values != 0.0, u.values, 1.0), 0.0)
    logp = np.zeros_like(u.values)
    nz = u.values != 0.0
    logp[nz] = pp.p * np.log(np.abs(u.values[nz]))
    nonlinear = c.V.values * uabs_p2u - c.Q.values * uabs_p2u * logp
    return Field(grid, div.ravel() + nonlinear)


def plap_nehari_residual(u: Field, c: Coefficients, pp: PLapParams) -> float:
    """<J_p'(u), u> = int (|grad u|^p + V|u|^p) - int Q |u|^p log |u|^p."""
    quad = plap_quadratic_part(u, c, pp)
    return quad - plap_q_mass(u, c, pp) - plap_log_term(u, c, pp)


def plap_fiber_value(u: Field, c: Coefficients, pp: PLapParams, s: float) -> float:
    """J_p(s u) via the closed-form fiber map."""
    if s <= 0.0:
        raise ParameterError("fiber map is defined for s > 0")
    if not np.any(u.values):
        raise ZeroFieldError("fiber map undefined on the zero field")
    j = plap_energy(u, c, pp)
    m = plap_q_mass(u, c, pp)
    return s**pp.p * j - s**pp.p * math.log(s) * m


def plap_nehari_scale(u: Field, c: Coefficients, pp: PLapParams) -> float:
    """Unique critical scale of the p-fiber map: exp(J_p / int Q|u|^p - 1/p)."""
    if not np.any(u.values):
        raise ZeroFieldError("Nehari scale undefined on the zero field")
    j = plap_energy(u, c, pp)
    m = plap_q_mass(u, c, pp)
    return math.exp(j / m - 1.0 / pp.p)


def plap_nehari_project(u: Field, c: Coefficients, pp: PLapParams) -> Field:
    """Scale u onto the p-Nehari set along its ray."""
    return Field(u.grid, plap_nehari_scale(u, c, pp) * u.values)


def plap_descend(u0: Field, c: Coefficients, pp: PLapParams, cfg: SolverConfig):
    """Nehari-projected descent for the p-logarithmic functional."""
    check_same_grid(u0, c.V, c.Q)
    return projected_descent(
        u0,
        cfg,
        energy_fn=lambda u: plap_energy(u, c, pp),
        grad_fn=lambda u: plap_gradient(u, c, pp),
        project_fn=lambda u: plap_nehari_project(u, c, pp),
        norm_fn=lambda u: plap_quadratic_part(u, c, pp) ** (1.0 / pp.p),
    )
