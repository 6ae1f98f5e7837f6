"""Star-shaped radial graphs ``{(r(theta), theta)}`` in a warped product.

The graph is described by ``phi = Phi(r(theta))`` with ``Phi' = 1/lambda``.
With ``v = sqrt(1 + |grad phi|^2)`` and ``g = lambda^2 (sigma + dphi dphi)``
the second fundamental form w.r.t. the outward normal is

    h_ij = lambda'/(v lambda) g_ij - (lambda/v) phi_ij,

``phi_ij`` being the Hessian of ``phi`` on the round sphere.  Everything is
expressed in the orthonormal fiber frame ``(e_theta, e_perp)`` of
:mod:`warpslice.fiber`.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .fiber import FiberDerivatives, FiberGrid, covariant_hessian
from .profile import WarpingProfile

__all__ = [
    "SurfaceDomainError",
    "GraphSurface",
    "CurvatureField",
    "EllipticPointReport",
    "graph_surface",
    "make_slice",
    "make_perturbed",
    "perturbation_shape",
    "clamp_amplitude",
    "ellipsoid_radius",
    "second_fundamental_form",
    "height_hessian_at_max",
    "export_surface_csv",
]

EDGE_MARGIN = 1e-6


class SurfaceDomainError(ValueError):
    """Graph values too close to (or beyond) the ends of the profile domain."""


@dataclass(frozen=True, eq=False)
class GraphSurface:
    profile: WarpingProfile
    grid: FiberGrid
    r: np.ndarray
    phi: np.ndarray
    dphi: FiberDerivatives
    v: np.ndarray

    @property
    def n(self) -> int:
        return self.profile.n


def graph_surface(profile: WarpingProfile, grid: FiberGrid, r, r_ref: float | None = None) -> GraphSurface:
    """Build a graph surface from nodal radii.

    ``r_ref`` fixes the additive constant of ``Phi`` (``Phi(r_ref) = 0``,
    default: domain midpoint); curvature does not depend on it.
    """
    if profile.n != grid.n:
        raise ValueError(f"profile dimension {profile.n} != grid dimension {grid.n}")
    r = np.array(r, dtype=float)
    if r.shape != grid.shape:
        raise ValueError(f"radius array shape {r.shape} does not match grid {grid.shape}")
    if not np.all(np.isfinite(r)):
        raise SurfaceDomainError("non-finite radius values")
    lo, hi = EDGE_MARGIN, profile.r_max - EDGE_MARGIN
    if r.min() < lo or r.max() > hi:
        raise SurfaceDomainError(
            f"graph radii [{r.min():.6g}, {r.max():.6g}] leave the admissible range "
            f"[{lo:.6g}, {hi:.6g}]"
        )
    phi = profile.primitive(r, r_ref=r_ref)
    dphi = covariant_hessian(grid, phi)
    v = np.sqrt(1.0 + dphi.grad_sq)
    return GraphSurface(profile, grid, r, phi, dphi, v)


def make_slice(profile: WarpingProfile, grid: FiberGrid, r0: float) -> GraphSurface:
    """The slice ``S^(n-1) x {r0}``."""
    if not 0.0 < r0 < profile.r_max:
        raise SurfaceDomainError(f"slice radius {r0!r} outside (0, {profile.r_max!r})")
    return graph_surface(profile, grid, np.full(grid.shape, float(r0)))


def clamp_amplitude(profile: WarpingProfile, r0: float, amplitude: float) -> float:
    """Keep perturbations inside the domain: at most ``0.5 min(r0, r_max - r0)``."""
    return min(abs(amplitude), 0.5 * min(r0, profile.r_max - r0))


def perturbation_shape(grid: FiberGrid, rng: np.random.Generator, modes: int = 3) -> np.ndarray:
    """Random smooth shape with ``max |shape| = 1``.

    Axisymmetric: seeded combination of ``cos(k theta)``, ``k = 1..modes``.
    Full sphere: combination of degree 1 and 2 polynomials in the embedding
    coordinates.
    """
    if grid.mode == "axisym":
        coef = rng.normal(size=modes)
        k = np.arange(1, modes + 1)
        shape = (coef[:, None] * np.cos(k[:, None] * grid.theta[None, :])).sum(axis=0)
    else:
        x, y, z = grid.embedding()
        basis = [x, y, z]
        if modes >= 2:
            basis += [x * y, x * z, y * z, x * x - y * y, 3 * z * z - 1]
        coef = rng.normal(size=len(basis))
        shape = sum(c * b for c, b in zip(coef, basis))
    return shape / np.abs(shape).max()


def make_perturbed(profile: WarpingProfile, grid: FiberGrid, r0: float, amplitude: float,
                   rng: np.random.Generator | int | None = None, modes: int = 3,
                   clamp: bool = True) -> GraphSurface:
    """Slice at ``r0`` plus a seeded random perturbation of sup-norm ``amplitude``."""
    if not isinstance(rng, np.random.Generator):
        rng = np.random.default_rng(rng)
    if clamp:
        amplitude = clamp_amplitude(profile, r0, amplitude)
    shape = perturbation_shape(grid, rng, modes)
    return graph_surface(profile, grid, r0 + amplitude * shape)


def ellipsoid_radius(grid: FiberGrid, a: float, c: float) -> np.ndarray:
    """Polar radius of the spheroid ``(x^2 + y^2)/a^2 + z^2/c^2 = 1`` at the nodes."""
    x, y, z = grid.embedding()
    return 1.0 / np.sqrt((x * x + y * y) / a ** 2 + z * z / c ** 2)


@dataclass(frozen=True, eq=False)
class CurvatureField:
    """Per-node curvature data of a graph surface.

    ``g`` and ``h`` are 2x2 blocks in the orthonormal fiber frame; for axisym
    grids the ``perp`` entry stands for ``n - 2`` identical directions.
    ``kappa`` has ``n - 1`` columns sorted ascending.  ``kappa_theta`` and
    ``kappa_perp`` keep the frame-aligned values (axisym only).
    """

    surface: GraphSurface
    lam: np.ndarray
    dlam: np.ndarray
    ddlam: np.ndarray
    g: np.ndarray
    h: np.ndarray
    kappa: np.ndarray
    kappa_theta: np.ndarray | None
    kappa_perp: np.ndarray | None
    u: np.ndarray
    radial: np.ndarray
    xi: np.ndarray
    dmu: np.ndarray

    @property
    def n(self) -> int:
        return self.surface.n

    @property
    def grid(self) -> FiberGrid:
        return self.surface.grid

    @property
    def profile(self) -> WarpingProfile:
        return self.surface.profile


def second_fundamental_form(s: GraphSurface) -> CurvatureField:
    """Induced metric, second fundamental form and principal curvatures."""
    n = s.n
    lam, dlam, ddlam = s.profile.eval(s.r)
    d = s.dphi
    v = s.v
    lam2 = lam * lam
    gt, gp = d.d_theta, d.d_perp
    g = np.empty(s.r.shape + (2, 2))
    g[..., 0, 0] = lam2 * (1.0 + gt * gt)
    g[..., 0, 1] = g[..., 1, 0] = lam2 * gt * gp
    g[..., 1, 1] = lam2 * (1.0 + gp * gp)
    hess = np.empty_like(g)
    hess[..., 0, 0] = d.hess_tt
    hess[..., 0, 1] = hess[..., 1, 0] = d.hess_tp
    hess[..., 1, 1] = d.hess_pp
    a = (dlam / (v * lam))[..., None, None]
    b = (lam / v)[..., None, None]
    h = a * g - b * hess
    if not np.all(np.isfinite(h)):
        raise ValueError("second fundamental form is not finite (pole singularity?)")

    if s.grid.mode == "axisym":
        k_t = h[..., 0, 0] / g[..., 0, 0]
        k_p = h[..., 1, 1] / g[..., 1, 1]
        kappa = np.column_stack([k_t] + [k_p] * (n - 2))
        kappa = np.sort(kappa, axis=-1, kind="stable")
    else:
        det_g = g[..., 0, 0] * g[..., 1, 1] - g[..., 0, 1] ** 2
        det_h = h[..., 0, 0] * h[..., 1, 1] - h[..., 0, 1] ** 2
        tr = h[..., 0, 0] * g[..., 1, 1] + h[..., 1, 1] * g[..., 0, 0] - 2.0 * h[..., 0, 1] * g[..., 0, 1]
        disc = np.sqrt(np.maximum(tr * tr - 4.0 * det_g * det_h, 0.0))
        kappa = np.stack([(tr - disc) / (2.0 * det_g), (tr + disc) / (2.0 * det_g)], axis=-1)
        k_t = k_p = None

    u = lam / v
    radial = 1.0 / v
    xi = lam * np.sqrt(d.grad_sq) / v
    dmu = s.grid.weights * lam ** (n - 1) * v
    return CurvatureField(s, lam, dlam, ddlam, g, h, kappa, k_t, k_p, u, radial, xi, dmu)


@dataclass
class EllipticPointReport:
    index: tuple
    theta: float
    r: float
    min_kappa: float
    bound: float
    margin: float
    ok: bool
    identity_residual: float

    def lines(self):
        return [
            f"argmax r at theta={self.theta:.6g} (node {self.index}), r={self.r:.17g}",
            f"min kappa = {self.min_kappa:.17g}, lambda'/lambda = {self.bound:.17g}",
            f"margin = {self.margin:.6g} -> {'elliptic' if self.ok else 'NOT elliptic'}",
            f"height Hessian identity residual (sup) = {self.identity_residual:.6g}",
        ]


def _axisym_d(grid, f):
    g = np.concatenate(([f[0]], f, [f[-1]]))
    h = grid.dtheta
    return (g[2:] - g[:-2]) / (2.0 * h), (g[2:] - 2.0 * g[1:-1] + g[:-2]) / (h * h)


def _height_identity_residual(c: CurvatureField) -> float:
    """Sup norm of ``Hess h + (lambda'/lambda) dh (d_r)^T - (lambda' - u kappa_i)/lambda delta``.

    ``h`` is the height (radius) restricted to the surface, in the principal
    frame ``(meridian, latitude directions)``.  Axisymmetric grids only.
    """
    s = c.surface
    grid = s.grid
    lam, dlam = c.lam, c.dlam
    r1, r2 = _axisym_d(grid, s.r)
    G = lam * lam * s.v * s.v
    G1, _ = _axisym_d(grid, G)
    cot = np.cos(grid.theta) / np.sin(grid.theta)
    hess_11 = (r2 - 0.5 * G1 * r1 / G) / G
    hess_pp = (dlam * r1 / lam + cot) * r1 / G
    res_11 = hess_11 + (dlam / lam) * r1 * r1 / G - (dlam - c.u * c.kappa_theta) / lam
    res_pp = hess_pp - (dlam - c.u * c.kappa_perp) / lam
    return float(max(np.abs(res_11).max(), np.abs(res_pp).max()))


def _quadratic_at(f, k, x):
    """Quadratic through nodes ``k-1, k, k+1`` (even ghosts) evaluated at offset ``x`` cells."""
    g = np.concatenate(([f[0]], f, [f[-1]]))
    fm, f0, fp = g[k], g[k + 1], g[k + 2]
    return f0 + 0.5 * x * (fp - fm) + 0.5 * x * x * (fp - 2.0 * f0 + fm)


def _refined_max(grid, r):
    """Argmax node of ``r`` and the offset (in cells) of the parabolic vertex.

    A vertex beyond the first or last node is pulled back onto the pole.
    """
    k = int(np.argmax(r))
    g = np.concatenate(([r[0]], r, [r[-1]]))
    curv = g[k] - 2.0 * g[k + 1] + g[k + 2]
    x = 0.0 if curv >= 0 else 0.5 * (g[k] - g[k + 2]) / curv
    x = min(max(x, -0.5), 0.5)
    if k == 0 and x < 0:
        x = -0.5
    elif k == r.size - 1 and x > 0:
        x = 0.5
    return k, x


def height_hessian_at_max(s: GraphSurface, c: CurvatureField | None = None,
                          tol: float = 1e-6) -> EllipticPointReport:
    """Check that the maximum of the radius is elliptic with ``kappa_i >= lambda'/lambda``.

    On axisymmetric grids the maximum is located to second order by a
    parabola through the top three nodes, and the curvatures and the bound
    are interpolated there.  Evaluating at the top node itself leaves an
    O(h) error in ``kappa_perp``, which is exactly tangent to the bound at a
    true maximum.  Full-s2 grids use the top node.
    """
    if c is None:
        c = second_fundamental_form(s)
    if s.grid.mode == "axisym":
        k, x = _refined_max(s.grid, s.r)
        idx = (k,)
        theta = float(s.grid.theta[k] + x * s.grid.dtheta)
        r_max = float(_quadratic_at(s.r, k, x))
        kap = [float(_quadratic_at(c.kappa_theta, k, x)), float(_quadratic_at(c.kappa_perp, k, x))]
        kmin = min(kap)
        bound = float(_quadratic_at(c.dlam / c.lam, k, x))
        resid = _height_identity_residual(c)
    else:
        idx = np.unravel_index(int(np.argmax(s.r)), s.r.shape)
        theta = float(s.grid.theta[idx[0]])
        r_max = float(s.r[idx])
        kmin = float(c.kappa[idx].min())
        bound = float(c.dlam[idx] / c.lam[idx])
        resid = math.nan
    margin = kmin - bound
    return EllipticPointReport(tuple(int(i) for i in idx), theta, r_max, kmin, bound,
                               margin, margin >= -tol, resid)


def export_surface_csv(c: CurvatureField, fh) -> None:
    """Columns ``theta[, psi], r, v, kappa_1..kappa_{n-1}, u, dmu``."""
    s = c.surface
    n = s.n
    w = csv.writer(fh, lineterminator="\n")
    head = ["theta"] + (["psi"] if s.grid.mode == "full-s2" else [])
    w.writerow(head + ["r", "v"] + [f"kappa_{i + 1}" for i in range(n - 1)] + ["u", "dmu"])
    coords = [m.ravel() for m in s.grid.mesh()]
    kap = c.kappa.reshape(-1, n - 1)
    cols = coords + [s.r.ravel(), s.v.ravel()] + [kap[:, i] for i in range(n - 1)] + [
        c.u.ravel(), c.dmu.ravel()]
    for row in zip(*cols):
        w.writerow([format(float(x), ".17g") for x in row])
