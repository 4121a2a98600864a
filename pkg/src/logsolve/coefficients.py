"""Periodic coefficient data V, Q and their standing hypotheses.

Coefficients are sampled from declared analytic formulas (the
descriptor) so that a run can be reproduced from its config alone.
Validation happens once, at construction: min Q > 0, min(V+Q) > 0 and
exact 1-periodicity under integer shifts on periodic grids.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import PeriodicityViolation, PositivityViolation
from .lattice import Boundary, Field, Grid, check_same_grid, shift

_TWO_PI = 2.0 * np.pi


def _axis_coordinates(grid: Grid, axis: int) -> np.ndarray:
    """Sample coordinates for formula evaluation along one axis.

    On periodic grids the coordinate is reduced mod 1 by evaluating one
    period and tiling, so sampled 1-periodic formulas are bitwise
    invariant under integer shifts (a shift is then an exact roll of
    identical tiles).
    """
    n = grid.cells[axis]
    if grid.boundary is Boundary.PERIODIC:
        per_unit = n // round(grid.box[axis])
        one_period = (np.arange(per_unit) + 0.5) / per_unit
        return np.tile(one_period, n // per_unit)
    return (np.arange(n) + 0.5) * grid.spacing[axis]


def _eval_descriptor(desc: dict, grid: Grid) -> np.ndarray:
    kind = desc.get("kind")
    if kind == "constant":
        return np.full(grid.npoints, float(desc["value"]))
    if kind == "harmonic":
        vals = np.full(grid.cells, float(desc.get("offset", 0.0)))
        for term in desc.get("terms", ()):
            axis = int(term.get("axis", 0))
            if not 0 <= axis < grid.dim:
                raise ValueError(f"term axis {axis} out of range for dim {grid.dim}")
            harmonic = term.get("harmonic", 1)
            if harmonic != int(harmonic) or int(harmonic) < 1:
                raise ValueError("harmonic must be a positive integer (1-periodicity)")
            amp = float(term.get("amplitude", 1.0))
            phase = float(term.get("phase", 0.0))
            arg = _TWO_PI * int(harmonic) * _axis_coordinates(grid, axis) + phase
            trig = term.get("type", "cos")
            if trig == "cos":
                profile = amp * np.cos(arg)
            elif trig == "sin":
                profile = amp * np.sin(arg)
            else:
                raise ValueError(f"unknown trig type {trig!r}")
            shape = [1] * grid.dim
            shape[axis] = grid.cells[axis]
            vals = vals + profile.reshape(shape)
        return vals.ravel()
    raise ValueError(f"unknown coefficient kind {kind!r}")


def constant_descriptor(value: float) -> dict:
    return {"kind": "constant", "value": float(value)}


@dataclass(frozen=True)
class Coefficients:
    """Sampled 1-periodic V and Q plus the formulas that generated them."""

    V: Field
    Q: Field
    descriptor: dict

    @property
    def grid(self) -> Grid:
        return self.V.grid

    @property
    def vq_sum(self) -> np.ndarray:
        return self.V.values + self.Q.values


def make_coefficients(descriptor: dict, grid: Grid) -> Coefficients:
    """Sample V, Q from their descriptor and enforce the hypotheses."""
    if set(descriptor) != {"V", "Q"}:
        raise ValueError("coefficient descriptor must have exactly the keys V and Q")
    v_field = Field(grid, _eval_descriptor(descriptor["V"], grid))
    q_field = Field(grid, _eval_descriptor(descriptor["Q"], grid))
    check_same_grid(v_field, q_field)

    q_min = float(q_field.values.min())
    if q_min <= 0.0:
        raise PositivityViolation(f"min Q = {q_min} must be positive")
    vq_min = float((v_field.values + q_field.values).min())
    if vq_min <= 0.0:
        raise PositivityViolation(f"min (V+Q) = {vq_min} must be positive")

    if grid.boundary is Boundary.PERIODIC:
        unit = [0] * grid.dim
        for ax in range(grid.dim):
            k = list(unit)
            k[ax] = 1
            for name, f in (("V", v_field), ("Q", q_field)):
                if not np.array_equal(shift(f, k).values, f.values):
                    raise PeriodicityViolation(
                        f"{name} is not exactly 1-periodic along axis {ax}"
                    )

    return Coefficients(V=v_field, Q=q_field, descriptor=descriptor)
