"""Elementary symmetric functions of principal curvatures.

All functions take curvature vectors along the last axis, so a whole
surface's worth of nodes can be processed at once.  ``kappa`` has length
``n - 1`` for an ambient dimension ``n``.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "ConeError",
    "sigma",
    "sigma_all",
    "sigma_truncated",
    "newton_tensor_diag",
    "cone_level",
    "maclaurin_margins",
    "margin_scale",
    "SymReport",
    "sym_report",
    "write_sym_csv",
    "sample_cone",
]


class ConeError(ValueError):
    """Curvature vector outside the Garding cone required by an inequality."""


def sigma_all(kappa) -> np.ndarray:
    """``sigma_0 .. sigma_{len(kappa)}`` along a new last axis.

    One-variable-at-a-time recurrence ``e_k <- e_k + kappa_m e_{k-1}``.
    """
    kappa = np.asarray(kappa, dtype=float)
    d = kappa.shape[-1]
    e = np.zeros(kappa.shape[:-1] + (d + 1,))
    e[..., 0] = 1.0
    for m in range(d):
        km = kappa[..., m]
        # descending k so e_{k-1} is still the previous stage
        for k in range(m + 1, 0, -1):
            e[..., k] = e[..., k] + km * e[..., k - 1]
    return e


def sigma(k: int, kappa):
    """``sigma_k(kappa)``; 1 for ``k = 0`` and 0 for ``k > len(kappa)``."""
    if k < 0:
        raise ValueError("k must be >= 0")
    kappa = np.asarray(kappa, dtype=float)
    d = kappa.shape[-1]
    if k > d:
        out = np.zeros(kappa.shape[:-1])
    else:
        out = sigma_all(kappa)[..., k]
    return float(out) if out.ndim == 0 else out


def sigma_truncated(k: int, i: int, kappa):
    """``sigma_k`` of ``kappa`` with entry ``i`` removed."""
    kappa = np.asarray(kappa, dtype=float)
    d = kappa.shape[-1]
    if not 0 <= i < d:
        raise IndexError(f"index {i} out of range for {d} curvatures")
    if k < 0:
        return 0.0 if kappa.ndim == 1 else np.zeros(kappa.shape[:-1])
    return sigma(k, np.delete(kappa, i, axis=-1))


def newton_tensor_diag(p: int, kappa) -> np.ndarray:
    """Diagonal of ``T^(p) = d sigma_p / d h`` in the principal frame: ``sigma_{p-1;i}``."""
    kappa = np.asarray(kappa, dtype=float)
    d = kappa.shape[-1]
    if not 1 <= p <= d:
        raise ValueError(f"p must be in 1..{d}")
    return np.stack([np.asarray(sigma_truncated(p - 1, i, kappa)) for i in range(d)], axis=-1)


def cone_level(kappa, sigmas=None):
    """Largest ``k`` with ``sigma_1, ..., sigma_k`` all strictly positive."""
    if sigmas is None:
        sigmas = sigma_all(kappa)
    pos = sigmas[..., 1:] > 0
    # count of leading True values
    level = np.cumprod(pos, axis=-1).sum(axis=-1)
    return int(level) if np.ndim(level) == 0 else level


def maclaurin_margins(kappa, k: int) -> np.ndarray:
    """Margins ``M_j = sigma_{j-1} - j/(n-j) C(n-1,j)^(1/j) sigma_j^((j-1)/j)``, j = 1..k.

    Raises
    ------
    ConeError
        If ``kappa`` is not in the cone ``Gamma_k^+``, or if some
        ``sigma_{k-1;i}`` fails to be positive there.
    """
    kappa = np.asarray(kappa, dtype=float)
    d = kappa.shape[-1]
    n = d + 1
    if not 1 <= k <= d:
        raise ValueError(f"k must be in 1..{d}")
    s = sigma_all(kappa)
    if np.any(np.atleast_1d(cone_level(kappa, s)) < k):
        raise ConeError(f"curvature vector not in Gamma_{k}^+")
    trunc = newton_tensor_diag(k, kappa)
    if np.any(trunc <= 0):
        raise ConeError(f"sigma_{k-1};i not positive inside Gamma_{k}^+")
    out = []
    for j in range(1, k + 1):
        coef = j / (n - j) * math.comb(n - 1, j) ** (1.0 / j)
        out.append(s[..., j - 1] - coef * s[..., j] ** ((j - 1) / j))
    return np.stack(out, axis=-1)


def margin_scale(kappa, k: int) -> np.ndarray:
    """``max(1, |sigma_{j-1}|, rhs_j)`` per margin, for relative tolerances."""
    kappa = np.asarray(kappa, dtype=float)
    n = kappa.shape[-1] + 1
    s = sigma_all(kappa)
    out = []
    for j in range(1, k + 1):
        coef = j / (n - j) * math.comb(n - 1, j) ** (1.0 / j)
        rhs = coef * np.abs(s[..., j]) ** ((j - 1) / j)
        out.append(np.maximum(np.maximum(1.0, np.abs(s[..., j - 1])), rhs))
    return np.stack(out, axis=-1)


@dataclass
class SymReport:
    kappa: np.ndarray
    sigmas: np.ndarray
    level: int
    margins: np.ndarray

    @property
    def n(self) -> int:
        return self.kappa.size + 1


def sym_report(kappa) -> SymReport:
    """Symmetric functions, cone level and Maclaurin margins up to the cone level."""
    kappa = np.asarray(kappa, dtype=float)
    s = sigma_all(kappa)
    level = cone_level(kappa, s)
    margins = maclaurin_margins(kappa, level) if level >= 1 else np.zeros(0)
    return SymReport(kappa, s, level, margins)


def write_sym_csv(reports, fh) -> None:
    """One row per report: kappa_i, sigma_j, level, margin_j (empty when undefined)."""
    reports = list(reports)
    d = max(r.kappa.size for r in reports)
    w = csv.writer(fh, lineterminator="\n")
    w.writerow([f"kappa_{i + 1}" for i in range(d)] + [f"sigma_{j}" for j in range(d + 1)]
               + ["level"] + [f"margin_{j + 1}" for j in range(d)])
    for r in reports:
        def cells(arr, size):
            vals = [format(float(x), ".17g") for x in arr]
            return vals + [""] * (size - len(vals))

        w.writerow(cells(r.kappa, d) + cells(r.sigmas, d + 1) + [r.level] + cells(r.margins, d))


def sample_cone(rng: np.random.Generator, n: int, k: int, count: int,
                mean: float = 1.0, spread: float = 1.5, batch: int = 4096) -> np.ndarray:
    """Rejection-sample ``count`` vectors of ``Gamma_k^+`` in ``R^(n-1)``.

    Proposals are Gaussian with positive mean; entries are independent so
    mixed-sign vectors near the cone boundary are common.
    """
    out = []
    have = 0
    while have < count:
        prop = rng.normal(mean, spread, size=(batch, n - 1))
        keep = prop[np.atleast_1d(cone_level(prop)) >= k]
        out.append(keep)
        have += keep.shape[0]
    return np.concatenate(out)[:count]
