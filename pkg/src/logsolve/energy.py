"""The energy functional, its convex splitting, gradient and coercivity checks.

J(u) = 1/2 int (|grad u|^2 + (V+Q) u^2) - 1/2 int Q u^2 log u^2.

The logarithmic nonlinearity is split below a threshold delta into a
convex piece F1 (kept nonsmooth in the analysis, plain C^1 here) and a
superquadratic C^1 remainder F2 with F2 - F1 = (1/2) s^2 log s^2.  Both
branches match in value and derivative at |s| = delta.  Convexity of F1
holds exactly for delta <= e^{-3/2}; that bound is enforced.

The pointwise extensions s^2 log s^2 -> 0 and s log s^2 -> 0 at s = 0
are used throughout, so the zero set of u never produces NaNs.
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
    gradient_sq_integral,
    h1_norm_sq,
    integrate,
    laplacian_apply,
)

#: Largest delta for which both F1 branches are convex (F1'' >= 0).
DELTA_MAX = math.exp(-1.5)

#: Default splitting threshold, strictly inside the convex range.
DELTA_DEFAULT = math.exp(-2.0)


@dataclass(frozen=True)
class SplitParams:
    """Threshold delta of the F1/F2 splitting."""

    delta: float = DELTA_DEFAULT

    def __post_init__(self):
        if not 0.0 < self.delta <= DELTA_MAX:
            raise ParameterError(
                f"delta must lie in (0, e^(-3/2) ~ {DELTA_MAX:.5f}] "
                "for F1 to be convex"
            )


@dataclass(frozen=True)
class EnergyBreakdown:
    """All scalar diagnostics of one field under J."""

    j: float
    phi: float
    psi: float
    quad: float
    logterm: float
    nehari_residual: float
    q_mass: float

    def as_dict(self):
        return {
            "j": self.j,
            "phi": self.phi,
            "psi": self.psi,
            "quad": self.quad,
            "logterm": self.logterm,
            "nehari_residual": self.nehari_residual,
            "q_mass": self.q_mass,
        }


def _sq_log_sq(s: np.ndarray) -> np.ndarray:
    """s^2 log s^2, continuously extended by 0 at s = 0."""
    out = np.zeros_like(s)
    nz = s != 0.0
    sn = s[nz]
    # 2 s^2 log|s| instead of s^2 log s^2: squaring first can underflow
    # to zero for subnormal s and produce 0 * (-inf)
    out[nz] = 2.0 * (sn * sn) * np.log(np.abs(sn))
    return out


def _s_log_sq(s: np.ndarray) -> np.ndarray:
    """s log s^2, continuously extended by 0 at s = 0."""
    out = np.zeros_like(s)
    nz = s != 0.0
    sn = s[nz]
    out[nz] = 2.0 * sn * np.log(np.abs(sn))
    return out


def f1_eval(s, p: SplitParams):
    """Convex splitting part F1."""
    s = np.asarray(s, dtype=np.float64)
    d = p.delta
    inner_branch = -0.5 * _sq_log_sq(s)
    outer_branch = (
        -0.5 * s * s * (math.log(d * d) + 3.0) + 2.0 * d * np.abs(s) - 0.5 * d * d
    )
    out = np.where(np.abs(s) < d, inner_branch, outer_branch)
    return float(out) if out.ndim == 0 else out


def f1_prime(s, p: SplitParams):
    """Derivative of F1."""
    s = np.asarray(s, dtype=np.float64)
    d = p.delta
    inner_branch = -_s_log_sq(s) - s
    outer_branch = -s * (math.log(d * d) + 3.0) + 2.0 * d * np.sign(s)
    out = np.where(np.abs(s) < d, inner_branch, outer_branch)
    return float(out) if out.ndim == 0 else out


def f2_eval(s, p: SplitParams):
    """C^1 splitting part F2; vanishes on |s| <= delta."""
    s = np.asarray(s, dtype=np.float64)
    d = p.delta
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio_log = np.where(s != 0.0, np.log(np.maximum(s * s, 1e-300) / (d * d)), 0.0)
    outer_branch = (
        0.5 * s * s * ratio_log + 2.0 * d * np.abs(s) - 1.5 * s * s - 0.5 * d * d
    )
    out = np.where(np.abs(s) < d, 0.0, outer_branch)
    return float(out) if out.ndim == 0 else out


def f2_prime(s, p: SplitParams):
    """Derivative of F2."""
    s = np.asarray(s, dtype=np.float64)
    d = p.delta
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio_log = np.where(s != 0.0, np.log(np.maximum(s * s, 1e-300) / (d * d)), 0.0)
    outer_branch = s * ratio_log - 2.0 * s + 2.0 * d * np.sign(s)
    out = np.where(np.abs(s) < d, 0.0, outer_branch)
    return float(out) if out.ndim == 0 else out


def energy(u: Field, c: Coefficients, p: SplitParams = SplitParams()) -> EnergyBreakdown:
    """Evaluate J and all its splitting diagnostics for one field."""
    grid = check_same_grid(u, c.V, c.Q)
    vol = grid.cell_volume
    uv = u.values
    q = c.Q.values

    quad = h1_norm_sq(u, c)
    q_mass = vol * exact_sum(q * uv * uv)
    logterm = vol * exact_sum(q * _sq_log_sq(uv))
    j = 0.5 * quad - 0.5 * logterm
    phi = 0.5 * quad - vol * exact_sum(q * f2_eval(uv, p))
    psi = vol * exact_sum(q * f1_eval(uv, p))
    # quad_V = quad - q_mass; Nehari residual <J'(u),u> = quad_V - logterm.
    nehari_residual = quad - q_mass - logterm
    return EnergyBreakdown(
        j=j,
        phi=phi,
        psi=psi,
        quad=quad,
        logterm=logterm,
        nehari_residual=nehari_residual,
        q_mass=q_mass,
    )


def gradient_field(u: Field, c: Coefficients) -> Field:
    """Strong-form residual -Lap_h u + V u - Q u log u^2.

    The L2 pairing of this field against v is the directional derivative
    of J at u in direction v; against u itself it gives the Nehari
    residual exactly (discrete summation by parts).
    """
    check_same_grid(u, c.V, c.Q)
    lap = laplacian_apply(u)
    vals = lap.values + c.V.values * u.values - c.Q.values * _s_log_sq(u.values)
    return Field(u.grid, vals)


def _central_gradient_components(f: Field):
    """Central-difference gradient per axis (used by the weighted bound)."""
    grid = f.grid
    a = f.mesh()
    comps = []
    for ax, h in enumerate(grid.spacing):
        if grid.boundary is Boundary.PERIODIC:
            comps.append((np.roll(a, -1, axis=ax) - np.roll(a, 1, axis=ax)) / (2 * h))
        else:
            comps.append(np.gradient(a, h, axis=ax))
    return comps


def logsob_slack(u: Field, a: float) -> float:
    """RHS minus LHS of the logarithmic Sobolev inequality.

    int u^2 log u^2 <= (a^2/pi) |grad u|_2^2
                       + (log |u|_2^2 - N (1 + log a)) |u|_2^2.

    Nonnegative (up to quadrature error) for decaying fields and a > 0.
    """
    if a <= 0.0:
        raise ParameterError("log-Sobolev parameter a must be positive")
    mass = integrate(Field(u.grid, u.values**2))
    if mass == 0.0:
        raise ZeroFieldError("log-Sobolev slack undefined for the zero field")
    dim = u.grid.dim
    grad_sq = gradient_sq_integral(u)
    entropy = u.grid.cell_volume * exact_sum(_sq_log_sq(u.values))
    rhs = (a * a / math.pi) * grad_sq + (math.log(mass) - dim * (1.0 + math.log(a))) * mass
    return rhs - entropy


def weighted_logsob_bound(u: Field, c: Coefficients, a: float) -> float:
    """Upper bound for int Q u^2 log(Q u^2) from the sqrt(Q)-substituted inequality.

    Returns (2a^2/pi) (int Q |grad u|^2 + int u^2 |grad sqrt(Q)|^2)
            + (log int Q u^2 - N (1 + log a)) int Q u^2.

    Requires 2 a^2 max(Q) / pi <= 1/2 so the gradient term can be
    absorbed by the quadratic part of the energy.
    """
    grid = check_same_grid(u, c.Q)
    if a <= 0.0:
        raise ParameterError("log-Sobolev parameter a must be positive")
    q_max = float(c.Q.values.max())
    if 2.0 * a * a * q_max / math.pi > 0.5:
        raise ParameterError(
            "a too large: need 2 a^2 max(Q) / pi <= 1/2 for gradient absorption"
        )
    q_mass = integrate(Field(grid, c.Q.values * u.values**2))
    if q_mass == 0.0:
        raise ZeroFieldError("weighted bound undefined for the zero field")
    vol = grid.cell_volume
    q_mesh = c.Q.mesh()

    grad_u = _central_gradient_components(u)
    q_grad_u = sum(exact_sum(q_mesh * g * g) for g in grad_u)

    sqrt_q = Field(grid, np.sqrt(c.Q.values))
    grad_sq_q = _central_gradient_components(sqrt_q)
    u_mesh = u.mesh()
    u_grad_sqrt_q = sum(exact_sum(u_mesh * u_mesh * g * g) for g in grad_sq_q)

    pref = (2.0 * a * a / math.pi) * vol * (q_grad_u + u_grad_sqrt_q)
    return pref + (math.log(q_mass) - grid.dim * (1.0 + math.log(a))) * q_mass


def weighted_entropy(u: Field, c: Coefficients) -> float:
    """int Q u^2 log(Q u^2), the quantity bounded by weighted_logsob_bound."""
    grid = check_same_grid(u, c.Q)
    w = np.sqrt(c.Q.values) * u.values
    return grid.cell_volume * exact_sum(_sq_log_sq(w))
