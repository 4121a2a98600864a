"""Fiber maps and exact projection onto the Nehari set.

Along a ray s -> s*u the energy obeys the closed form

    J(su) = J(u) s^2 - s^2 log s * int Q u^2,

which is exact for the discrete functional as well (the s-dependence of
the quadrature is identical to the continuum one).  The unique critical
scale of the fiber map is therefore available in closed form,

    s* = exp(J(u) / int Q u^2 - 1/2),

and projection onto the Nehari set never needs root finding.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .coefficients import Coefficients
from .energy import EnergyBreakdown, SplitParams, energy
from .errors import NonpositiveScaleError, ZeroFieldError
from .lattice import Field


@dataclass(frozen=True)
class FiberReport:
    """Diagnostics of one fiber map s -> J(su)."""

    s_star: float
    j_at_star: float
    phi_samples: tuple


def _ray_data(u: Field, c: Coefficients, p: SplitParams):
    if not np.any(u.values):
        raise ZeroFieldError("fiber map undefined on the zero field")
    return energy(u, c, p)


def fiber_value(u: Field, c: Coefficients, p: SplitParams, s: float) -> float:
    """J(s u) via the closed-form fiber map."""
    if s <= 0.0:
        raise NonpositiveScaleError("fiber map is defined for s > 0")
    bd = _ray_data(u, c, p)
    return bd.j * s * s - s * s * math.log(s) * bd.q_mass


def nehari_scale(u: Field, c: Coefficients, p: SplitParams) -> float:
    """The unique s* > 0 with d/ds J(su) = 0; puts s*u on the Nehari set."""
    bd = _ray_data(u, c, p)
    return math.exp(bd.j / bd.q_mass - 0.5)


def nehari_project(u: Field, c: Coefficients, p: SplitParams) -> Field:
    """Scale u onto the Nehari set along its ray."""
    s = nehari_scale(u, c, p)
    return Field(u.grid, s * u.values)


def fiber_report(
    u: Field, c: Coefficients, p: SplitParams, n_samples: int = 33
) -> FiberReport:
    """Sample the fiber map around its maximum for diagnostics."""
    bd = _ray_data(u, c, p)
    s_star = math.exp(bd.j / bd.q_mass - 0.5)
    grid_s = np.geomspace(s_star / 10.0, 10.0 * s_star, n_samples)
    samples = tuple(
        (float(s), bd.j * s * s - s * s * math.log(s) * bd.q_mass) for s in grid_s
    )
    return FiberReport(
        s_star=s_star,
        j_at_star=bd.j * s_star**2 - s_star**2 * math.log(s_star) * bd.q_mass,
        phi_samples=samples,
    )


def on_nehari_identity_gap(bd: EnergyBreakdown) -> float:
    """|J - (1/2) int Q u^2| — zero for fields on the Nehari set."""
    return abs(bd.j - 0.5 * bd.q_mass)
