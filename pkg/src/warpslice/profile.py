"""Warping functions for metrics ``dr^2 + lambda(r)^2 g_N`` and their structural checks.

A :class:`WarpingProfile` evaluates ``(lambda, lambda', lambda'')`` on
``[0, r_max)``.  Three families are provided:

* closed-form profiles (``lambda = a cosh r``),
* geometry-only profiles (``lambda = r``, flat space; used for round-sphere
  sanity checks, never claimed to satisfy the horizon conditions),
* deSitter-Schwarzschild profiles obtained by integrating
  ``lambda'^2 = f(lambda)`` with ``f(s) = 1 - m s^(2-n) - kappa s^2``.

The deSitter-Schwarzschild potential is imported from the general-relativity
literature; nothing else in the package depends on its specific form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.integrate import solve_ivp
from scipy.interpolate import CubicHermiteSpline
from scipy.optimize import brentq

__all__ = [
    "ProfileDomainError",
    "WarpingProfile",
    "ConditionResult",
    "ProfileReport",
    "make_euclidean",
    "make_cosh",
    "make_ds_schwarzschild",
    "potential",
    "check_conditions",
    "ricci_radial_coefficient",
    "dump_profile",
    "load_profile",
]

F_STOP = 1e-12
H1_TOL = 1e-8


class ProfileDomainError(ValueError):
    """Raised when a profile is evaluated outside its domain or returns lambda <= 0."""


@dataclass(frozen=True)
class WarpingProfile:
    """A warping function on ``[0, r_max)``.

    ``evaluator`` maps an array of radii to ``(lam, dlam, ddlam)``.  ``params``
    carries what is needed to rebuild the profile from text (see
    :func:`dump_profile`).
    """

    n: int
    r_max: float
    evaluator: Callable[[np.ndarray], tuple[np.ndarray, np.ndarray, np.ndarray]] = field(repr=False)
    B: float = 1.0
    kind: str = "closed-form"
    name: str = ""
    params: dict = field(default_factory=dict)
    nodes: tuple[np.ndarray, np.ndarray, np.ndarray] | None = field(default=None, repr=False)
    note: str = ""

    def __post_init__(self):
        if self.n < 3:
            raise ValueError(f"ambient dimension must be >= 3, got {self.n}")
        if not self.r_max > 0:
            raise ValueError("r_max must be positive")
        if self.kind not in ("closed-form", "ode-integrated", "geometry-only"):
            raise ValueError(f"unknown profile kind {self.kind!r}")

    def __call__(self, r):
        return self.eval(r)

    def eval(self, r):
        """Return ``(lam, dlam, ddlam)`` at ``r`` (scalar or array)."""
        ra = np.asarray(r, dtype=float)
        if np.any(~np.isfinite(ra)) or np.any(ra < 0.0) or np.any(ra > self.r_max):
            bad = ra[(~np.isfinite(ra)) | (ra < 0.0) | (ra > self.r_max)]
            raise ProfileDomainError(
                f"r={bad.flat[0]!r} outside profile domain [0, {self.r_max!r}]"
            )
        lam, dlam, ddlam = self.evaluator(ra)
        if np.any(~np.isfinite(lam)) or np.any(lam <= 0.0):
            raise ProfileDomainError("profile produced non-positive or non-finite lambda")
        if np.ndim(r) == 0:
            return float(lam), float(dlam), float(ddlam)
        return lam, dlam, ddlam

    @property
    def primed(self) -> bool:
        """True when the fiber is a general Einstein manifold (B != 1)."""
        return self.B != 1.0

    def primitive(self, r, r_ref: float | None = None, panels: int = 8, order: int = 16):
        """Antiderivative of ``1/lambda`` normalized to vanish at ``r_ref``.

        ``r_ref`` defaults to the domain midpoint.  Composite Gauss-Legendre
        with a fixed panel count, so the result is a smooth function of ``r``.
        """
        if r_ref is None:
            r_ref = 0.5 * self.r_max
        ra = np.asarray(r, dtype=float).ravel()
        x, w = np.polynomial.legendre.leggauss(order)
        # panel boundaries as fractions of [r_ref, r]
        edges = np.linspace(0.0, 1.0, panels + 1)
        mid = 0.5 * (edges[1:] + edges[:-1])
        half = 0.5 * (edges[1:] - edges[:-1])
        frac = (mid[:, None] + half[:, None] * x[None, :]).ravel()
        wts = (half[:, None] * w[None, :]).ravel()
        span = ra - r_ref
        pts = r_ref + span[:, None] * frac[None, :]
        lam = self.eval(pts)[0]
        out = span * (wts[None, :] / lam).sum(axis=1)
        if np.ndim(r) == 0:
            return float(out[0])
        return out.reshape(np.shape(r))

    def r_of_lambda(self, value: float) -> float:
        """Radius at which ``lambda(r) = value`` (``lambda`` is increasing)."""
        lo, hi = 0.0, self.r_max
        flo = self.eval(lo)[0] - value if self.kind != "geometry-only" else -value
        fhi = self.eval(hi)[0] - value
        if flo > 0 or fhi < 0:
            raise ProfileDomainError(f"lambda={value!r} not attained on [0, {self.r_max!r}]")
        if flo == 0:
            return 0.0
        return brentq(lambda r: self.eval(r)[0] - value, lo, hi, xtol=1e-15, rtol=9e-16)


def make_euclidean(n: int = 3, r_max: float = 10.0) -> WarpingProfile:
    """Flat space, ``lambda(r) = r`` (geometry-only)."""

    def ev(r):
        return r.copy(), np.ones_like(r), np.zeros_like(r)

    return WarpingProfile(n=n, r_max=r_max, evaluator=ev, B=1.0, kind="geometry-only",
                          name="euclidean")


def make_cosh(n: int = 3, B: float = 1.0, a: float | None = None, r_max: float = 2.0) -> WarpingProfile:
    """``lambda(r) = a cosh(r)``; ``a`` defaults to ``sqrt(B)``."""
    if a is None:
        a = math.sqrt(B)
    if a <= 0:
        raise ValueError("amplitude a must be positive")

    def ev(r):
        c = a * np.cosh(r)
        return c, a * np.sinh(r), c.copy()

    return WarpingProfile(n=n, r_max=r_max, evaluator=ev, B=B, kind="closed-form",
                          name="cosh", params={"a": a})


# --- deSitter-Schwarzschild -------------------------------------------------


class _Potential:
    """``f(s) = 1 - m s^(2-n) - kappa s^2`` with cancellation-free shifted forms."""

    def __init__(self, n, m, kappa):
        self.n, self.m, self.kappa = n, m, kappa

    def __call__(self, s):
        return 1.0 - self.m * s ** (2.0 - self.n) - self.kappa * s * s

    def deriv(self, s):
        return (self.n - 2) * self.m * s ** (1.0 - self.n) - 2.0 * self.kappa * s

    def shifted(self, root, d):
        """``f(root + d)`` assuming ``f(root) = 0``, accurate for tiny ``d``."""
        k = 2.0 - self.n
        return (-self.m * root ** k * np.expm1(k * np.log1p(d / root))
                - self.kappa * d * (2.0 * root + d))

    def roots(self):
        """Inner horizon ``s0`` and, for ``kappa > 0``, cosmological horizon ``s1``."""
        n, m, kappa = self.n, self.m, self.kappa
        if kappa > 0:
            s_peak = ((n - 2) * m / (2.0 * kappa)) ** (1.0 / n)
            if self(s_peak) <= 0:
                raise ValueError(
                    f"kappa={kappa!r} too large: f has no positive region (max f = {self(s_peak):.3g})"
                )
            s0 = brentq(self, s_peak * 1e-12, s_peak, xtol=1e-300, rtol=9e-16, maxiter=500)
            hi = s_peak * 2.0
            while self(hi) > 0:
                hi *= 2.0
            s1 = brentq(self, s_peak, hi, xtol=1e-300, rtol=9e-16, maxiter=500)
            return s0, s1
        lo, hi = 1e-300 ** (1.0 / n), 1.0
        while self(hi) <= 0:
            hi *= 2.0
            if hi > 1e150:
                raise ValueError("potential f has no horizon root")
        if kappa == 0:
            s0 = m ** (1.0 / (n - 2))
            s0 = brentq(self, s0 * 0.5, s0 * 2.0, xtol=1e-300, rtol=9e-16, maxiter=500)
        else:
            s0 = brentq(self, lo, hi, xtol=1e-300, rtol=9e-16, maxiter=500)
        return s0, None


def make_ds_schwarzschild(n: int = 3, m: float = 1.0, kappa: float = 0.0,
                          r_max_hint: float = 10.0, nodes: int = 4001) -> WarpingProfile:
    """deSitter-Schwarzschild warping function starting at the horizon.

    The ODE ``lambda' = sqrt(f(lambda))`` is degenerate at ``r = 0`` where
    ``f(s0) = 0``.  It is integrated in a regularized variable: ``s = s0 + t^2``
    when ``kappa <= 0`` and ``s = s0 + A (1 - cos tau)``, ``A = (s1 - s0)/2``
    when a cosmological horizon ``s1`` exists; both make ``dr/dvar`` smooth
    and nonzero at the horizon(s).  Integration stops at ``r_max_hint`` or
    where ``f(lambda) < 1e-12``, whichever comes first.

    Between nodes ``lambda`` is a cubic Hermite interpolant in
    ``(lambda, lambda')``; ``lambda'`` and ``lambda''`` are then recovered from
    the first integral ``lambda'^2 = f(lambda)``, ``lambda'' = f'(lambda)/2``.
    """
    if m <= 0:
        raise ValueError("mass parameter m must be positive")
    if n < 3:
        raise ValueError("n must be >= 3")
    pot = _Potential(n, float(m), float(kappa))
    s0, s1 = pot.roots()
    fp0 = pot.deriv(s0)
    if not fp0 > 0:
        raise ValueError("horizon root is not simple (f'(s0) <= 0)")

    if s1 is None:
        def s_of(var):
            return s0 + var * var

        def drdvar(var, _r):
            d = var * var
            if var == 0.0:
                return [2.0 / math.sqrt(fp0)]
            return [2.0 * var / math.sqrt(pot.shifted(s0, d))]

        def dlam_of(var):
            return np.sqrt(np.maximum(pot.shifted(s0, var * var), 0.0))

        var_end = 1.0
        while s0 + var_end ** 2 < s0 + r_max_hint + 10.0:
            var_end *= 2.0
        stop_reason = "r_max_hint"
        var_stop = None
    else:
        A = 0.5 * (s1 - s0)
        fp1 = pot.deriv(s1)

        def s_of(var):
            return s0 + 2.0 * A * np.sin(0.5 * var) ** 2

        def f_of(var):
            var = np.asarray(var, dtype=float)
            lower = pot.shifted(s0, 2.0 * A * np.sin(0.5 * var) ** 2)
            upper = pot.shifted(s1, -2.0 * A * np.cos(0.5 * var) ** 2)
            return np.where(var <= 0.5 * math.pi, lower, upper)

        def drdvar(var, _r):
            if var == 0.0:
                return [math.sqrt(2.0 * A / fp0)]
            if var == math.pi:
                return [math.sqrt(-2.0 * A / fp1)]
            return [A * math.sin(var) / math.sqrt(float(f_of(var)))]

        def dlam_of(var):
            return np.sqrt(np.maximum(f_of(var), 0.0))

        # f(s(tau)) = F_STOP near the cosmological horizon
        var_stop = brentq(lambda t: float(f_of(t)) - F_STOP, 0.5 * math.pi, math.pi,
                          xtol=1e-15, rtol=9e-16)
        var_end = var_stop
        stop_reason = "f<1e-12"

    def hit_hint(var, r):
        return r[0] - r_max_hint

    hit_hint.terminal = True
    hit_hint.direction = 1
    sol = solve_ivp(drdvar, (0.0, var_end), [0.0], method="DOP853", rtol=1e-13, atol=1e-15,
                    dense_output=True, events=hit_hint)
    if not sol.success:
        raise RuntimeError(f"profile integration failed: {sol.message}")
    if sol.t_events[0].size:
        var_end = float(sol.t_events[0][0])
        stop_reason = "r_max_hint"
    elif s1 is None:
        raise RuntimeError("integration ended before reaching r_max_hint")

    var_nodes = np.linspace(0.0, var_end, nodes)
    r_nodes = sol.sol(var_nodes)[0]
    r_nodes[0] = 0.0
    d_nodes = s_of(var_nodes) - s0
    dlam_nodes = dlam_of(var_nodes)
    r_max = float(r_nodes[-1])
    lam_nodes = s0 + d_nodes
    note = f"domain end at r={r_max:.17g} ({stop_reason})"
    return _ds_from_nodes(n, float(m), float(kappa), s0, r_nodes, lam_nodes, dlam_nodes,
                          note=note)


def _ds_from_nodes(n, m, kappa, s0, r_nodes, lam_nodes, dlam_nodes, note=""):
    pot = _Potential(n, m, kappa)
    d_nodes = lam_nodes - s0
    spline = CubicHermiteSpline(r_nodes, d_nodes, dlam_nodes, extrapolate=False)

    def ev(r):
        d = np.maximum(spline(r), 0.0)
        lam = s0 + d
        dlam = np.sqrt(np.maximum(pot.shifted(s0, d), 0.0))
        ddlam = 0.5 * pot.deriv(lam)
        return lam, dlam, ddlam

    return WarpingProfile(
        n=n, r_max=float(r_nodes[-1]), evaluator=ev, B=1.0, kind="ode-integrated",
        name="ds-schwarzschild", params={"m": m, "kappa": kappa, "s0": s0},
        nodes=(np.asarray(r_nodes), np.asarray(lam_nodes), np.asarray(dlam_nodes)),
        note=note,
    )


def potential(profile: WarpingProfile):
    """The potential ``f`` of an ODE-integrated profile, as a callable."""
    if profile.name != "ds-schwarzschild":
        raise ValueError("profile has no deSitter-Schwarzschild potential")
    return _Potential(profile.n, profile.params["m"], profile.params["kappa"])


# --- conditions -------------------------------------------------------------


@dataclass
class ConditionResult:
    name: str
    verdict: str  # "pass" | "fail" | "skipped"
    margin: float = math.nan
    where: float = math.nan
    witness: float | None = None


@dataclass
class ProfileReport:
    conditions: list[ConditionResult]
    samples: int
    r_range: tuple[float, float]
    note: str = ""

    def __getitem__(self, key):
        for c in self.conditions:
            if c.name.rstrip("'") == key.rstrip("'"):
                return c
        raise KeyError(key)

    @property
    def ok(self) -> bool:
        return all(c.verdict != "fail" for c in self.conditions)

    def lines(self):
        out = []
        for c in self.conditions:
            line = f"{c.name:4s} {c.verdict:7s} margin={c.margin:.6g} at r={c.where:.6g}"
            if c.witness is not None:
                line += f" witness r={c.witness:.17g}"
            out.append(line)
        out.append(f"samples={self.samples} r in [{self.r_range[0]:.6g}, {self.r_range[1]:.6g}]")
        if self.note:
            out.append(self.note)
        return out


def _h3_quantity(n, B, lam, dlam, ddlam):
    return 2.0 * ddlam / lam - (n - 2) * (B - dlam * dlam) / (lam * lam)


def _h4_quantity(B, lam, dlam, ddlam):
    return ddlam / lam + (B - dlam * dlam) / (lam * lam)


def check_conditions(p: WarpingProfile, samples: int = 512, tol: float = 1e-10,
                     eps: float | None = None) -> ProfileReport:
    """Check (H1)-(H4) on a uniform grid of ``[eps, r_max - eps]``.

    With ``B != 1`` the Einstein-fiber variants are checked (names get a
    prime).  H2 and H4 require values above ``tol``; H3 allows each
    consecutive decrease of ``Q`` up to ``tol * (1 + |Q|)``.

    Raises
    ------
    ProfileDomainError
        If the profile cannot be evaluated (``lambda <= 0`` or non-finite).
    """
    if samples < 16:
        raise ValueError("samples must be >= 16")
    if eps is None:
        eps = 1e-6 * p.r_max
    r = np.linspace(eps, p.r_max - eps, samples)
    lam, dlam, ddlam = p.eval(r)
    if not (np.all(np.isfinite(dlam)) and np.all(np.isfinite(ddlam))):
        raise ProfileDomainError("profile derivatives are not finite on the sample grid")
    prime = "'" if p.primed else ""
    results = []

    if p.kind == "geometry-only":
        results.append(ConditionResult("H1" + prime, "skipped"))
    else:
        # one-sided cubic extrapolation to r = 0
        delta = min(1e-3, 0.01 * p.r_max)
        rr = np.array([delta, 2 * delta, 3 * delta])
        _, d1, d2 = p.eval(rr)
        d1_0 = 3 * d1[0] - 3 * d1[1] + d1[2]
        d2_0 = 3 * d2[0] - 3 * d2[1] + d2[2]
        ok = abs(d1_0) <= H1_TOL and d2_0 > H1_TOL
        margin = d2_0 if abs(d1_0) <= H1_TOL else -abs(d1_0)
        results.append(ConditionResult("H1" + prime, "pass" if ok else "fail", margin=margin,
                                       where=0.0, witness=None if ok else 0.0))

    k = int(np.argmin(dlam))
    ok = dlam[k] > tol
    results.append(ConditionResult("H2" + prime, "pass" if ok else "fail", margin=float(dlam[k]),
                                   where=float(r[k]), witness=None if ok else float(r[k])))

    q = _h3_quantity(p.n, p.B, lam, dlam, ddlam)
    dq = np.diff(q)
    slack = tol * (1.0 + np.abs(q[:-1]))
    k = int(np.argmin(dq + slack))
    ok = bool(np.all(dq >= -slack))
    results.append(ConditionResult("H3" + prime, "pass" if ok else "fail", margin=float(dq[k]),
                                   where=float(r[k]), witness=None if ok else float(r[k + 1])))

    h4 = _h4_quantity(p.B, lam, dlam, ddlam)
    k = int(np.argmin(h4))
    ok = h4[k] > tol
    results.append(ConditionResult("H4" + prime, "pass" if ok else "fail", margin=float(h4[k]),
                                   where=float(r[k]), witness=None if ok else float(r[k])))
    return ProfileReport(results, samples, (float(r[0]), float(r[-1])), note=p.note)


def ricci_radial_coefficient(p: WarpingProfile, r):
    """``(n-2) (lambda''/lambda + (B - lambda'^2)/lambda^2)``.

    ``Ric(e_j, nu)`` for a tangent unit vector ``e_j`` of a hypersurface is
    ``-coef * (xi_j/lambda) <d_r, nu>``.
    """
    ra = np.asarray(r, dtype=float)
    if np.any(ra <= 0) or np.any(ra >= p.r_max):
        raise ProfileDomainError(f"r must lie in (0, {p.r_max!r})")
    lam, dlam, ddlam = p.eval(ra)
    return (p.n - 2) * _h4_quantity(p.B, lam, dlam, ddlam)


# --- text serialization -----------------------------------------------------


def _fmt(x) -> str:
    return format(float(x), ".17g")


def dump_profile(p: WarpingProfile) -> str:
    """Key-value text block: one ``key = value`` per line, arrays space separated."""
    lines = [
        f"kind = {p.kind}",
        f"name = {p.name}",
        f"n = {p.n}",
        f"B = {_fmt(p.B)}",
        f"m = {_fmt(p.params.get('m', math.nan))}",
        f"kappa = {_fmt(p.params.get('kappa', math.nan))}",
        f"r_max = {_fmt(p.r_max)}",
    ]
    if "a" in p.params:
        lines.append(f"a = {_fmt(p.params['a'])}")
    if p.nodes is not None:
        lines.append(f"s0 = {_fmt(p.params['s0'])}")
        for key, arr in zip(("r", "lambda", "dlambda"), p.nodes):
            lines.append(f"{key} = " + " ".join(_fmt(x) for x in arr))
    return "\n".join(lines) + "\n"


def load_profile(text: str) -> WarpingProfile:
    """Inverse of :func:`dump_profile`; raises ``ValueError`` on malformed input."""
    kv = {}
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, _, value = line.partition("=")
        kv[key.strip()] = value.strip()
    try:
        return _profile_from_keys(kv)
    except KeyError as exc:
        raise ValueError(f"profile text lacks key {exc.args[0]!r}") from None


def _profile_from_keys(kv) -> WarpingProfile:
    name = kv.get("name", "")
    n = int(kv["n"])
    r_max = float(kv["r_max"])
    if name == "euclidean":
        return make_euclidean(n, r_max)
    if name == "cosh":
        return make_cosh(n, float(kv["B"]), float(kv["a"]), r_max)
    if name == "ds-schwarzschild":
        arrays = [np.array([float(x) for x in kv[k].split()]) for k in ("r", "lambda", "dlambda")]
        return _ds_from_nodes(n, float(kv["m"]), float(kv["kappa"]), float(kv["s0"]), *arrays)
    raise ValueError(f"unknown profile name {name!r}")
