"""Finite-difference calculus on the round fiber sphere.

Two discretizations are supported:

``axisym``
    Fields depending only on the polar angle of ``S^(n-1)``.  Nodes sit at
    cell centers ``theta_k = (k + 1/2) pi / N`` and poles are handled by even
    reflection, so central differences are second order up to the poles.
``full-s2``
    Latitude-longitude grid on ``S^2`` (``n = 3`` only) with interior
    latitudes.  The ghost row across a pole is the first row rotated by
    half a turn in longitude.

Fields are plain numpy arrays shaped like :attr:`FiberGrid.shape`.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "FiberError",
    "FiberGrid",
    "FiberDerivatives",
    "sphere_area",
    "axisym_grid",
    "full_s2_grid",
    "make_grid",
    "covariant_hessian",
    "integrate",
    "export_field_csv",
]


class FiberError(ValueError):
    """Raised for invalid fields or grids (e.g. non-finite pole terms)."""


def sphere_area(dim: int) -> float:
    """Area of the unit round sphere ``S^dim``."""
    return 2.0 * math.pi ** ((dim + 1) / 2.0) / math.gamma((dim + 1) / 2.0)


@dataclass(frozen=True, eq=False)
class FiberGrid:
    mode: str
    n: int
    theta: np.ndarray
    psi: np.ndarray | None
    weights: np.ndarray

    @property
    def shape(self):
        return self.weights.shape

    @property
    def dtheta(self) -> float:
        return math.pi / self.theta.size

    @property
    def dpsi(self) -> float:
        return 2.0 * math.pi / self.psi.size

    @property
    def size(self) -> int:
        return self.weights.size

    def mesh(self):
        """Node coordinates broadcast to :attr:`shape`."""
        if self.mode == "axisym":
            return (self.theta,)
        return np.meshgrid(self.theta, self.psi, indexing="ij")

    def embedding(self):
        """Unit-sphere coordinates ``(x, y, z)`` of the nodes (``z`` along the axis)."""
        if self.mode == "axisym":
            th = self.theta
            return np.sin(th), np.zeros_like(th), np.cos(th)
        th, ps = self.mesh()
        return np.sin(th) * np.cos(ps), np.sin(th) * np.sin(ps), np.cos(th)


def axisym_grid(n: int, N: int) -> FiberGrid:
    """Cell-centered polar grid on ``S^(n-1)`` for axisymmetric fields.

    Weights are the exact measures of the latitude bands, so constants
    integrate exactly.
    """
    if n < 3:
        raise ValueError("n must be >= 3")
    if N < 4:
        raise ValueError("need at least 4 polar nodes")
    h = math.pi / N
    theta = (np.arange(N) + 0.5) * h
    m = n - 2
    if m == 1:
        band = 2.0 * np.sin(theta) * math.sin(0.5 * h)
    else:
        x, w = np.polynomial.legendre.leggauss(8)
        pts = theta[:, None] + 0.5 * h * x[None, :]
        band = 0.5 * h * (np.sin(pts) ** m * w[None, :]).sum(axis=1)
    weights = sphere_area(n - 2) * band
    weights = 0.5 * (weights + weights[::-1])
    weights *= sphere_area(n - 1) / math.fsum(weights)
    return FiberGrid("axisym", n, theta, None, weights)


def full_s2_grid(N_theta: int, N_psi: int | None = None) -> FiberGrid:
    """Latitude-longitude grid on ``S^2``; ``N_psi`` defaults to ``2 N_theta``."""
    if N_psi is None:
        N_psi = 2 * N_theta
    if N_psi % 2:
        raise ValueError("N_psi must be even for pole reflection")
    h = math.pi / N_theta
    theta = (np.arange(N_theta) + 0.5) * h
    psi = np.arange(N_psi) * (2.0 * math.pi / N_psi)
    band = 2.0 * np.sin(theta) * math.sin(0.5 * h)
    weights = np.repeat((band * (2.0 * math.pi / N_psi))[:, None], N_psi, axis=1)
    weights = 0.5 * (weights + weights[::-1])
    return FiberGrid("full-s2", 3, theta, psi, weights)


def make_grid(mode: str, n: int, N: int) -> FiberGrid:
    if mode == "axisym":
        return axisym_grid(n, N)
    if mode == "full-s2":
        if n != 3:
            raise ValueError("full-s2 mode exists only for n = 3")
        return full_s2_grid(N)
    raise ValueError(f"unknown grid mode {mode!r}")


@dataclass(frozen=True)
class FiberDerivatives:
    """First and second covariant derivatives in an orthonormal frame.

    The frame is ``(e_theta, e_perp)``.  For ``full-s2`` ``e_perp`` is the unit
    longitude direction; for ``axisym`` it stands for each of the ``n - 2``
    directions tangent to the latitude sphere, all carrying the same values
    (``multiplicity``).
    """

    d_theta: np.ndarray
    d_perp: np.ndarray
    hess_tt: np.ndarray
    hess_tp: np.ndarray
    hess_pp: np.ndarray
    multiplicity: int

    @property
    def grad_sq(self):
        return self.d_theta ** 2 + self.d_perp ** 2

    @property
    def trace(self):
        return self.hess_tt + self.multiplicity * self.hess_pp


def _pad_axisym(f):
    return np.concatenate(([f[0]], f, [f[-1]]))


def _pad_full(f):
    half = f.shape[1] // 2
    top = np.roll(f[0], half)[None, :]
    bottom = np.roll(f[-1], half)[None, :]
    g = np.concatenate((top, f, bottom), axis=0)
    return np.concatenate((g[:, -1:], g, g[:, :1]), axis=1)


def covariant_hessian(grid: FiberGrid, f) -> FiberDerivatives:
    """Gradient and Hessian of ``f`` w.r.t. the round metric, second-order differences."""
    f = np.asarray(f, dtype=float)
    if f.shape != grid.shape:
        raise FiberError(f"field shape {f.shape} does not match grid {grid.shape}")
    if not np.all(np.isfinite(f)):
        raise FiberError("field has non-finite values")
    h = grid.dtheta
    if grid.mode == "axisym":
        g = _pad_axisym(f)
        d1 = (g[2:] - g[:-2]) / (2.0 * h)
        d2 = (g[2:] - 2.0 * g[1:-1] + g[:-2]) / (h * h)
        cot = np.cos(grid.theta) / np.sin(grid.theta)
        pp = cot * d1
        if not np.all(np.isfinite(pp)):
            raise FiberError("pole term cot(theta) f' is not finite")
        zero = np.zeros_like(f)
        return FiberDerivatives(d1, zero, d2, zero.copy(), pp, grid.n - 2)

    k = grid.dpsi
    g = _pad_full(f)
    c = g[1:-1, 1:-1]
    f_t = (g[2:, 1:-1] - g[:-2, 1:-1]) / (2.0 * h)
    f_p = (g[1:-1, 2:] - g[1:-1, :-2]) / (2.0 * k)
    f_tt = (g[2:, 1:-1] - 2.0 * c + g[:-2, 1:-1]) / (h * h)
    f_pp = (g[1:-1, 2:] - 2.0 * c + g[1:-1, :-2]) / (k * k)
    f_tp = (g[2:, 2:] - g[2:, :-2] - g[:-2, 2:] + g[:-2, :-2]) / (4.0 * h * k)
    sin = np.sin(grid.theta)[:, None]
    cot = (np.cos(grid.theta) / np.sin(grid.theta))[:, None]
    hess_tp = (f_tp - cot * f_p) / sin
    hess_pp = f_pp / sin ** 2 + cot * f_t
    if not (np.all(np.isfinite(hess_tp)) and np.all(np.isfinite(hess_pp))):
        raise FiberError("pole terms of the Hessian are not finite")
    return FiberDerivatives(f_t, f_p / sin, f_tt, hess_tp, hess_pp, 1)


def integrate(grid: FiberGrid, f) -> float:
    """Integral of ``f`` over the unit fiber sphere (fixed summation order)."""
    f = np.broadcast_to(np.asarray(f, dtype=float), grid.shape)
    return math.fsum((grid.weights * f).ravel())


def export_field_csv(grid: FiberGrid, f, fh, name: str = "value") -> None:
    """Write ``theta[, psi], value`` rows to an open text file."""
    f = np.asarray(f, dtype=float)
    w = csv.writer(fh, lineterminator="\n")
    if grid.mode == "axisym":
        w.writerow(["theta", name])
        for th, val in zip(grid.theta, f):
            w.writerow([format(th, ".17g"), format(val, ".17g")])
    else:
        w.writerow(["theta", "psi", name])
        th, ps = grid.mesh()
        for a, b, val in zip(th.ravel(), ps.ravel(), f.ravel()):
            w.writerow([format(a, ".17g"), format(b, ".17g"), format(val, ".17g")])
