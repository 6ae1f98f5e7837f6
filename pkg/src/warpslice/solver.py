"""Constant-sigma_p graphs by damped Newton iteration, and slice rigidity experiments.

The unknown is the nodal radius vector of an axisymmetric graph.  The
residual ``F(r) = sigma_p(r) - c`` only couples neighbouring nodes, so the
finite-difference Jacobian is tridiagonal and is assembled from six
grouped residual evaluations (central differences).
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_banded
from scipy.optimize import brentq

from .fiber import FiberGrid
from .profile import WarpingProfile
from .surface import (
    GraphSurface,
    SurfaceDomainError,
    clamp_amplitude,
    graph_surface,
    make_slice,
    perturbation_shape,
    second_fundamental_form,
)
from .symfunc import sigma

__all__ = [
    "SolverError",
    "NoRootError",
    "SolverOptions",
    "SolveResult",
    "sigma_p_field",
    "slice_value",
    "slice_locator",
    "solve_constant_sigma_p",
    "rigidity_experiment",
    "write_experiment_csv",
]


class SolverError(RuntimeError):
    """Newton iteration cannot proceed (e.g. singular Jacobian)."""


class NoRootError(ValueError):
    """No slice radius realizes the requested sigma_p value."""


@dataclass
class SolverOptions:
    tol: float = 1e-10
    max_iter: int = 50
    fd_step: float = 1e-6
    max_halvings: int = 30


@dataclass
class SolveResult:
    converged: bool
    iterations: int
    residual: float
    dev: float
    surface: GraphSurface
    steps: list = field(default_factory=list)
    message: str = ""

    @property
    def r_star(self) -> float:
        return float(np.mean(self.surface.r))


def sigma_p_field(s: GraphSurface, p: int) -> np.ndarray:
    return sigma(p, second_fundamental_form(s).kappa)


def slice_value(profile: WarpingProfile, p: int, r):
    """``sigma_p`` of the slice at radius ``r``: ``C(n-1, p) (lambda'/lambda)^p``."""
    lam, dlam, _ = profile.eval(r)
    return math.comb(profile.n - 1, p) * (np.asarray(dlam) / np.asarray(lam)) ** p


def slice_locator(profile: WarpingProfile, p: int, c: float, samples: int = 4000) -> list[float]:
    """All slice radii with ``sigma_p = c``, by sign-change scan plus Brent refinement."""
    eps = 1e-6 * profile.r_max
    r = np.linspace(eps, profile.r_max - eps, samples)
    g = slice_value(profile, p, r) - c
    roots = []
    for k in np.nonzero(g == 0)[0]:
        roots.append(float(r[k]))
    for k in np.nonzero(g[:-1] * g[1:] < 0)[0]:
        roots.append(brentq(lambda x: float(slice_value(profile, p, x)) - c, r[k], r[k + 1],
                            xtol=1e-14, rtol=1e-15))
    if not roots:
        raise NoRootError(
            f"no slice with sigma_{p} = {c!r}; slice values span "
            f"[{g.min() + c:.6g}, {g.max() + c:.6g}]"
        )
    return sorted(roots)


def _tridiagonal_jacobian(residual, r, step):
    # Central differences: a one-sided step carries an O(step / h^2) bias,
    # which near the poles swamps the small row sums of the operator.
    N = r.size
    J = np.zeros((3, N))  # banded storage for solve_banded((1, 1), ...)
    for group in range(3):
        cols = np.arange(group, N, 3)
        dr = step * (1.0 + np.abs(r[cols]))
        rp, rm = r.copy(), r.copy()
        rp[cols] += dr
        rm[cols] -= dr
        df = residual(rp) - residual(rm)
        for j, d in zip(cols, dr):
            for i in (j - 1, j, j + 1):
                if 0 <= i < N:
                    J[1 + i - j, j] = df[i] / (2.0 * d)
    return J


def _rms(F):
    return math.sqrt(math.fsum(F.ravel() ** 2) / F.size)


def _dense(J):
    N = J.shape[1]
    A = np.zeros((N, N))
    for off in (-1, 0, 1):
        for j in range(N):
            i = j + off
            if 0 <= i < N:
                A[i, j] = J[1 + off, j]
    return A


def solve_constant_sigma_p(profile: WarpingProfile, grid: FiberGrid, p: int, c: float,
                           init: GraphSurface, opts: SolverOptions | None = None) -> SolveResult:
    """Damped Newton for ``sigma_p(r) = c`` on an axisymmetric graph.

    A step is accepted when the new iterate stays in the profile domain, keeps
    ``sigma_p > 0`` and lowers the RMS residual; otherwise it is halved.
    Convergence is judged on ``max |F|``.  (The max norm makes a poor merit
    function: near the poles it can rise for a step or two on the way in.)

    Raises
    ------
    SolverError
        If the Jacobian is singular.
    """
    opts = opts or SolverOptions()
    if grid.mode != "axisym":
        raise ValueError("solver works on axisymmetric grids")
    if c <= 0:
        raise ValueError("target value c must be positive")
    if not 1 <= p <= profile.n - 1:
        raise ValueError(f"p must be in 1..{profile.n - 1}")

    def evaluate(r):
        s = graph_surface(profile, grid, r)
        return s, sigma_p_field(s, p)

    surf = init
    sp = sigma_p_field(surf, p)
    if np.any(sp <= 0):
        raise ValueError("initial surface must have sigma_p > 0 everywhere")
    r = surf.r.copy()
    F = sp - c
    norm = float(np.abs(F).max())
    merit = _rms(F)
    steps = []
    it = 0
    while norm > opts.tol and it < opts.max_iter:
        J = _tridiagonal_jacobian(lambda x: evaluate(x)[1] - c, r, opts.fd_step)
        try:
            d = solve_banded((1, 1), J, -F)
        except np.linalg.LinAlgError as exc:
            cond = np.linalg.cond(_dense(J))
            raise SolverError(f"singular Jacobian (condition estimate {cond:.3g})") from exc
        if not np.all(np.isfinite(d)):
            cond = np.linalg.cond(_dense(J))
            raise SolverError(f"singular Jacobian (condition estimate {cond:.3g})")
        alpha = 1.0
        for _ in range(opts.max_halvings + 1):
            trial = r + alpha * d
            try:
                s_new, sp_new = evaluate(trial)
            except SurfaceDomainError:
                alpha *= 0.5
                continue
            new_merit = _rms(sp_new - c)
            if np.all(sp_new > 0) and new_merit < merit:
                break
            alpha *= 0.5
        else:
            return SolveResult(False, it, norm, float(np.ptp(r)), surf, steps,
                               "no admissible step (line search exhausted)")
        it += 1
        steps.append(alpha)
        r, surf, F, merit = trial, s_new, sp_new - c, new_merit
        norm = float(np.abs(F).max())
    ok = norm <= opts.tol
    msg = "converged" if ok else f"max_iter={opts.max_iter} reached"
    return SolveResult(ok, it, norm, float(np.ptp(r)), surf, steps, msg)


@dataclass
class ExperimentRow:
    amplitude: float
    seed: int
    p: int
    converged: bool
    iterations: int
    residual: float
    dev: float
    r_star: float
    locator_error: float
    message: str = ""


def rigidity_experiment(profile: WarpingProfile, p: int, amplitudes, seed: int,
                        grid: FiberGrid, r0: float | None = None, modes: int = 3,
                        opts: SolverOptions | None = None) -> list[ExperimentRow]:
    """Perturb the slice at ``r0`` and solve back to its ``sigma_p`` value.

    Each amplitude gets a seeded random cosine perturbation (clamped to stay in
    the domain).  ``locator_error`` is the distance of the converged radius
    to the nearest :func:`slice_locator` root.  Failures are recorded, not
    raised.
    """
    if r0 is None:
        r0 = 0.5 * profile.r_max
    c = float(slice_value(profile, p, r0))
    roots = slice_locator(profile, p, c)
    rng = np.random.default_rng(seed)
    rows = []
    for amp in amplitudes:
        shape = perturbation_shape(grid, rng, modes)
        a = clamp_amplitude(profile, r0, amp)
        try:
            init = graph_surface(profile, grid, r0 + a * shape) if a > 0 else make_slice(profile, grid, r0)
            res = solve_constant_sigma_p(profile, grid, p, c, init, opts)
        except (SolverError, ValueError) as exc:
            rows.append(ExperimentRow(float(amp), seed, p, False, 0, math.nan, math.nan, math.nan,
                                      math.nan, str(exc)))
            continue
        r_star = res.r_star
        loc = min(abs(r_star - x) for x in roots)
        rows.append(ExperimentRow(float(amp), seed, p, res.converged, res.iterations, res.residual,
                                  res.dev, r_star, loc, res.message))
    return rows


EXPERIMENT_FIELDS = ["amplitude", "seed", "p", "iterations", "residual", "dev", "r_star",
                     "converged", "locator_error"]


def write_experiment_csv(rows, fh) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(EXPERIMENT_FIELDS)
    for row in rows:
        out = []
        for key in EXPERIMENT_FIELDS:
            val = getattr(row, key)
            out.append(format(val, ".17g") if isinstance(val, float) else str(val))
        w.writerow(out)
