"""Ground-state computation by Nehari-projected descent and multistart search.

Each iterate stays on the Nehari set: the step moves against the
strong-form residual and is then rescaled onto the set by the exact
closed-form projection.  Because the projection maximizes the energy
along the ray and every iterate already sits at its own ray maximum,
the projected objective u -> J(project(u)) has directional derivative
<J'(u), v> at points of the set, so a standard Armijo backtracking
line search applies unchanged.

The raw residual direction is preconditioned with (I - Lap_h)^{-1}
(a discrete H^1 Riesz map); this keeps the iteration count mesh
independent instead of scaling with 1/h^2.  Convergence is still
declared on the unpreconditioned residual norm.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from .coefficients import Coefficients, constant_descriptor, make_coefficients
from .energy import SplitParams, energy, gradient_field
from .errors import (
    BoundaryError,
    BoxTooSmallError,
    LineSearchStalledError,
    NonFiniteEnergyError,
    ParameterError,
    ZeroFieldError,
)
from .lattice import (
    Boundary,
    Field,
    Grid,
    all_integer_shifts,
    check_same_grid,
    h1_norm_sq,
    inner,
    l2_norm_sq,
    shift,
)
from .nehari import nehari_project

SIGN_POSITIVE = "positive"
SIGN_NEGATIVE = "negative"
SIGN_CHANGING = "sign_changing"

#: amplitude fraction below which stray values do not count as a sign change
SIGN_TOL = 1e-10


@dataclass(frozen=True)
class SolverConfig:
    max_iters: int = 2000
    tol_residual: float = 1e-8
    step_init: float = 1.0
    armijo_c: float = 1e-4
    armijo_shrink: float = 0.5
    seed: int = 0
    n_starts: int = 8
    dedup_tol: float = 1e-2

    def __post_init__(self):
        if self.max_iters < 1 or self.n_starts < 1:
            raise ParameterError("max_iters and n_starts must be positive")
        if self.tol_residual <= 0 or self.step_init <= 0 or self.dedup_tol <= 0:
            raise ParameterError("tolerances and step_init must be positive")
        if not 0.0 < self.armijo_c < 1.0 or not 0.0 < self.armijo_shrink < 1.0:
            raise ParameterError("Armijo parameters must lie in (0, 1)")


@dataclass(frozen=True)
class SolverReport:
    iterations: int
    energy_history: tuple
    final_residual: float
    energy: float
    sign_pattern: str
    converged: bool
    stall_reason: str = ""

    def as_dict(self):
        return {
            "iterations": self.iterations,
            "energy_history": list(self.energy_history),
            "final_residual": self.final_residual,
            "energy": self.energy,
            "sign_pattern": self.sign_pattern,
            "converged": self.converged,
            "stall_reason": self.stall_reason,
        }


@dataclass(frozen=True)
class GaussonParams:
    """Closed-form Gaussian ground state of the constant-coefficient equation.

    Substituting exp(a) exp(-b |x - x_c|^2) into the equation with
    constant V0, Q0 and matching the |x|^2 and constant terms gives
    b = Q0/2 and a = (Q0 N + V0) / (2 Q0).
    """

    v0: float
    q0: float
    dim: int

    def __post_init__(self):
        if self.q0 <= 0.0 or self.v0 + self.q0 <= 0.0:
            raise ParameterError("need Q0 > 0 and V0 + Q0 > 0")

    @property
    def amplitude_exponent(self) -> float:
        return (self.q0 * self.dim + self.v0) / (2.0 * self.q0)

    @property
    def width(self) -> float:
        return self.q0 / 2.0


def gausson(v0: float, q0: float, grid: Grid) -> Field:
    """Sample the analytic Gausson, centered at the box center."""
    params = GaussonParams(v0=v0, q0=q0, dim=grid.dim)
    mesh = grid.meshgrid()
    dist_sq = np.zeros(grid.cells)
    for ax, (coord, length) in enumerate(zip(mesh, grid.box)):
        d = coord - 0.5 * length
        if grid.boundary is Boundary.PERIODIC:
            d = (d + 0.5 * length) % length - 0.5 * length
        dist_sq = dist_sq + d * d
    vals = math.exp(params.amplitude_exponent) * np.exp(-params.width * dist_sq)
    peak = vals.max()
    boundary_max = 0.0
    for ax in range(grid.dim):
        sl = [slice(None)] * grid.dim
        for edge in (0, -1):
            sl[ax] = edge
            boundary_max = max(boundary_max, float(np.abs(vals[tuple(sl)]).max()))
    if boundary_max >= 1e-12 * peak:
        raise BoxTooSmallError(
            f"Gausson boundary value {boundary_max:.3e} exceeds 1e-12 of the peak"
        )
    return Field(grid, vals.ravel())


def sign_pattern(u: Field) -> str:
    """Classify the sign of a field, ignoring stray values below SIGN_TOL."""
    amp = float(np.abs(u.values).max())
    if amp == 0.0:
        return SIGN_CHANGING
    tol = SIGN_TOL * amp
    if u.values.min() >= -tol:
        return SIGN_POSITIVE
    if u.values.max() <= tol:
        return SIGN_NEGATIVE
    return SIGN_CHANGING


class _RieszPreconditioner:
    """Sparse factorization of (I - Lap_h) on a grid."""

    def __init__(self, grid: Grid):
        mats = []
        for n, h in zip(grid.cells, grid.spacing):
            main = np.full(n, 2.0 / h**2)
            off = np.full(n - 1, -1.0 / h**2)
            lap = sp.diags([off, main, off], [-1, 0, 1], format="lil")
            if grid.boundary is Boundary.PERIODIC:
                lap[0, n - 1] = -1.0 / h**2
                lap[n - 1, 0] = -1.0 / h**2
            mats.append(sp.csr_matrix(lap))
        op = sp.identity(grid.npoints, format="csr")
        total = None
        eyes = [sp.identity(n, format="csr") for n in grid.cells]
        for ax, lap in enumerate(mats):
            factors = [eyes[i] if i != ax else lap for i in range(grid.dim)]
            term = factors[0]
            for f in factors[1:]:
                term = sp.kron(term, f, format="csr")
            total = term if total is None else total + term
        self._lu = splu(sp.csc_matrix(op + total))
        self.grid = grid

    def apply(self, g: Field) -> Field:
        return Field(self.grid, self._lu.solve(g.values))


_PRECOND_CACHE: dict = {}


def _preconditioner(grid: Grid) -> _RieszPreconditioner:
    key = (grid.dim, grid.cells, grid.box, grid.boundary)
    if key not in _PRECOND_CACHE:
        _PRECOND_CACHE[key] = _RieszPreconditioner(grid)
    return _PRECOND_CACHE[key]


class _LbfgsDirection:
    """Limited-memory quasi-Newton direction with the Riesz map as H0.

    The Riesz preconditioner alone leaves a large curvature spread
    (soft near-translation modes of pinned bumps against the stiff
    log-potential in the tails); a short curvature history removes it.
    Updates failing the positive-curvature condition are skipped, so the
    implied metric stays SPD and the direction stays a descent direction.
    """

    def __init__(self, precond: _RieszPreconditioner, vol: float, memory: int = 10):
        self.precond = precond
        self.vol = vol
        self.memory = memory
        self.pairs = []

    def reset(self):
        self.pairs.clear()

    def update(self, s_vals: np.ndarray, y_vals: np.ndarray):
        sy = self.vol * float(np.dot(s_vals, y_vals))
        ss = self.vol * float(np.dot(s_vals, s_vals))
        yy = self.vol * float(np.dot(y_vals, y_vals))
        if sy > 1e-10 * math.sqrt(ss * yy):
            self.pairs.append((s_vals, y_vals, 1.0 / sy))
            if len(self.pairs) > self.memory:
                self.pairs.pop(0)

    def apply(self, g: Field) -> Field:
        q = g.values.copy()
        alphas = []
        for s_vals, y_vals, rho in reversed(self.pairs):
            a = rho * self.vol * float(np.dot(s_vals, q))
            q -= a * y_vals
            alphas.append(a)
        r = self.precond.apply(Field(g.grid, q)).values.copy()
        for (s_vals, y_vals, rho), a in zip(self.pairs, reversed(alphas)):
            b = rho * self.vol * float(np.dot(y_vals, r))
            r += (a - b) * s_vals
        return Field(g.grid, r)


def projected_descent(
    u0: Field,
    cfg: SolverConfig,
    energy_fn,
    grad_fn,
    project_fn,
    norm_fn,
):
    """Generic Nehari-projected Armijo descent; shared by the p = 2 and
    p-Laplacian solvers.

    energy_fn(u) -> float, grad_fn(u) -> Field, project_fn(u) -> Field,
    norm_fn(u) -> float (the reference scale for the relative residual).
    """
    if not np.any(u0.values):
        raise ZeroFieldError("descent cannot start from the zero field")
    precond = _preconditioner(u0.grid)
    lbfgs = _LbfgsDirection(precond, u0.grid.cell_volume)

    u = project_fn(u0)
    j = energy_fn(u)
    if not math.isfinite(j):
        raise NonFiniteEnergyError("energy not finite at the initial point")
    history = [j]
    residual = math.inf
    converged = False
    stall_reason = ""
    iterations = 0
    prev_u = prev_g = None

    for iterations in range(cfg.max_iters + 1):
        g = grad_fn(u)
        residual = math.sqrt(l2_norm_sq(g))
        if residual <= cfg.tol_residual * norm_fn(u):
            converged = True
            break
        if iterations == cfg.max_iters:
            break
        if prev_u is not None:
            lbfgs.update(u.values - prev_u.values, g.values - prev_g.values)

        accepted = False
        for attempt in range(2):
            d = lbfgs.apply(g)
            slope = inner(g, d)
            if slope <= 0.0 or not math.isfinite(slope):
                lbfgs.reset()
                continue
            step = cfg.step_init
            while step > 1e-16 * cfg.step_init:
                trial_vals = u.values - step * d.values
                if not np.any(trial_vals):
                    step *= cfg.armijo_shrink
                    continue
                trial = project_fn(Field(u.grid, trial_vals))
                j_trial = energy_fn(trial)
                if not math.isfinite(j_trial):
                    raise NonFiniteEnergyError("energy not finite during line search")
                if j_trial <= j - cfg.armijo_c * step * slope:
                    accepted = True
                    break
                step *= cfg.armijo_shrink
            if accepted:
                break
            # retry once along the plain preconditioned direction
            lbfgs.reset()
        if not accepted:
            raise LineSearchStalledError(
                f"line search underflow at residual {residual:.3e}"
            )
        prev_u, prev_g = u, g
        u, j = trial, j_trial
        history.append(j)

    report = SolverReport(
        iterations=iterations,
        energy_history=tuple(history),
        final_residual=residual,
        energy=j,
        sign_pattern=sign_pattern(u),
        converged=converged,
        stall_reason=stall_reason,
    )
    return u, report


def descend(u0: Field, c: Coefficients, p: SplitParams, cfg: SolverConfig):
    """Nehari-projected descent for the logarithmic functional."""
    check_same_grid(u0, c.V, c.Q)
    return projected_descent(
        u0,
        cfg,
        energy_fn=lambda u: energy(u, c, p).j,
        grad_fn=lambda u: gradient_field(u, c),
        project_fn=lambda u: nehari_project(u, c, p),
        norm_fn=lambda u: math.sqrt(h1_norm_sq(u, c)),
    )


def orbit_distance(u1: Field, u2: Field) -> float:
    """Min over integer translations and sign flip of the L2 distance."""
    grid = check_same_grid(u1, u2)
    if grid.boundary is not Boundary.PERIODIC:
        raise BoundaryError("orbit distance defined on periodic grids only")
    best = math.inf
    for k in all_integer_shifts(grid):
        moved = shift(u2, k).values
        for signed in (moved, -moved):
            dist_sq = l2_norm_sq(Field(grid, u1.values - signed))
            best = min(best, math.sqrt(max(dist_sq, 0.0)))
    return best


def _bump_start(
    grid: Grid, c: Coefficients, rng: np.random.Generator, allow_spread: bool = False
) -> Field:
    """Random initializer: signed Gaussian bumps, or a near-uniform profile.

    Bump superpositions (1-3 bumps, centers on the period lattice plus
    jitter, random signs) localize and find the ground-state orbit.
    Spread near-uniform profiles sit in the basin of the delocalized
    1-periodic solution branch, which bump starts never reach; mixing
    both is what produces geometrically distinct classes in multistart.
    """
    mesh = grid.meshgrid()
    q_mean = float(np.mean(c.Q.values))
    if allow_spread and rng.uniform() < 0.25:
        # Modulate at the coefficient period: 1-periodic fields span an
        # invariant subspace of the descent map, so these starts stay on
        # the delocalized branch instead of collapsing into one bump.
        level = float(rng.uniform(0.5, 1.5))
        vals = np.full(grid.cells, level)
        for ax, coord in enumerate(mesh):
            phase = float(rng.uniform(0.0, 2.0 * math.pi))
            vals = vals * (1.0 + 0.05 * np.cos(2.0 * math.pi * coord + phase))
        return Field(grid, vals.ravel())
    n_bumps = int(rng.integers(1, 4))
    vals = np.zeros(grid.cells)
    for _ in range(n_bumps):
        width = 0.5 * q_mean * 10.0 ** float(rng.uniform(-0.5, 0.3))
        dist_sq = np.zeros(grid.cells)
        for ax, (coord, length) in enumerate(zip(mesh, grid.box)):
            center = float(rng.integers(0, max(round(length), 1)))
            center += 0.5 + 0.2 * float(rng.uniform(-1.0, 1.0))
            d = coord - center
            if grid.boundary is Boundary.PERIODIC:
                d = (d + 0.5 * length) % length - 0.5 * length
            dist_sq = dist_sq + d * d
        sign = 1.0 if rng.uniform() < 0.5 else -1.0
        vals = vals + sign * np.exp(-width * dist_sq)
    if not np.any(vals):
        vals = np.exp(-0.5 * q_mean * sum(m**2 for m in mesh))
    return Field(grid, vals.ravel())


def _run_one_start(index, c, p, cfg, allow_spread):
    rng = np.random.default_rng([cfg.seed, index])
    u0 = _bump_start(c.grid, c, rng, allow_spread=allow_spread)
    try:
        return descend(u0, c, p, cfg)
    except (LineSearchStalledError, NonFiniteEnergyError, ZeroFieldError):
        return None


def multistart(
    c: Coefficients,
    p: SplitParams,
    cfg: SolverConfig,
    include_spread: bool = True,
):
    """Seeded multistart search for geometrically distinct solutions.

    Runs descend from cfg.n_starts random initializers, drops the runs
    that did not converge, deduplicates by orbit distance (which
    includes the sign flip, since J is even) and returns the survivors
    sorted by energy.  The lowest level is the ground-state candidate.

    Pass include_spread=False to restrict the initializers to localized
    bumps.  With translation-invariant coefficients the delocalized
    branch and the ground-state orbit are connected by a continuum of
    near-minimizers, and spread starts then inflate the class count.
    """
    workers = int(os.environ.get("LOGSOLVE_THREADS", "1"))
    results = [None] * cfg.n_starts
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futures = {
                pool.submit(_run_one_start, i, c, p, cfg, include_spread): i
                for i in range(cfg.n_starts)
            }
            for fut, i in futures.items():
                results[i] = fut.result()
    else:
        for i in range(cfg.n_starts):
            results[i] = _run_one_start(i, c, p, cfg, include_spread)

    converged = [r for r in results if r is not None and r[1].converged]
    converged.sort(key=lambda pair: pair[1].energy)
    survivors = []
    for u, report in converged:
        if all(orbit_distance(u, kept_u) > cfg.dedup_tol for kept_u, _ in survivors):
            survivors.append((u, report))
    return survivors
