"""Disc distances, the extremal family of G2 and Caratheodory-type distances.

All distances are carried in tanh scale (``rho`` in [0, 1)); the Poincare
scale is ``atanh(rho)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, EmptyCompactSet
from .geometry import (
    GAUGE_TOL,
    DegreeVector,
    DomainSpec,
    _golden_max,
    _top_local_maxima,
    as_points,
    d_minkowski,
    g2_margin,
)

_CHUNK = 1 << 21  # complex entries per evaluation block


@dataclass(frozen=True)
class CircleGrid:
    """Uniform grid on |tau| = 1 followed by golden-section refinement."""

    n: int = 512
    refine_iters: int = 40
    n_peaks: int = 3

    def __post_init__(self):
        if self.n < 16:
            raise ValueError("CircleGrid.n must be at least 16")
        if self.refine_iters < 0:
            raise ValueError("refine_iters must be non-negative")

    @property
    def angles(self) -> np.ndarray:
        return 2 * np.pi * np.arange(self.n) / self.n

    def doubled(self) -> "CircleGrid":
        return CircleGrid(2 * self.n, self.refine_iters, self.n_peaks)


@dataclass(frozen=True)
class DistanceValue:
    rho: float
    dist: float
    argmax_tau: complex


def _mobius_raw(a, b):
    # |1 - conj(b) a|**2 = (1 - |a|**2)(1 - |b|**2) + |a - b|**2, written so the
    # result is bitwise symmetric in (a, b)
    num = np.abs(a - b)
    den = np.sqrt((1.0 - np.abs(a) ** 2) * (1.0 - np.abs(b) ** 2) + num * num)
    with np.errstate(invalid="ignore", divide="ignore"):
        return np.where(num == 0, 0.0, num / den)


def mobius(a, b):
    """Pseudo-hyperbolic distance |a - b| / |1 - conj(b) a| on the unit disc."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if np.any(np.abs(a) >= 1) or np.any(np.abs(b) >= 1):
        raise DomainError("mobius distance needs points of the open unit disc")
    out = _mobius_raw(a, b)
    return float(out) if out.ndim == 0 else out


def poincare(a, b):
    return np.arctanh(mobius(a, b))


def _phi_raw(z, tau):
    return (2 * tau * z[..., 1] - z[..., 0]) / (2 - tau * z[..., 0])


def extremal_phi(z, tau):
    """phi_tau(z1, z2) = (2 tau z2 - z1) / (2 - tau z1)."""
    z = as_points(z)
    tau = np.asarray(tau, dtype=complex)
    den = 2 - tau * z[..., 0]
    if np.any(np.abs(den) < 1e-12):
        raise DomainError("extremal_phi denominator vanishes")
    out = (2 * tau * z[..., 1] - z[..., 0]) / den
    return complex(out) if out.ndim == 0 else out


def _profile(z, w, theta):
    tau = np.exp(1j * theta)
    return _mobius_raw(_phi_raw(z, tau), _phi_raw(w, tau))


def _c_g2_block(z, w, grid: CircleGrid):
    theta = grid.angles
    vals = _profile(z[:, None, :], w[:, None, :], theta[None, :])
    best_idx = np.argmax(vals, axis=1)
    best = vals[np.arange(len(z)), best_idx]
    best_theta = theta[best_idx]
    if grid.refine_iters > 0:
        step = 2 * np.pi / grid.n
        peaks = _top_local_maxima(vals, grid.n_peaks)
        zz, ww = z[:, None, :], w[:, None, :]
        x, f = _golden_max(lambda t: _profile(zz, ww, t),
                           theta[peaks] - step, theta[peaks] + step, grid.refine_iters)
        j = np.argmax(f, axis=1)
        rows = np.arange(len(z))
        better = f[rows, j] > best
        best = np.where(better, f[rows, j], best)
        best_theta = np.where(better, x[rows, j], best_theta)
    return best, best_theta


def c_g2_rho(z, w, grid: CircleGrid = CircleGrid()):
    """tanh of the Caratheodory distance of G2 for arrays of point pairs.

    Returns ``(rho, theta)`` where ``exp(1j*theta)`` is the maximizing tau.
    No membership checking is done here; see :func:`c_g2`.
    """
    z, w = np.broadcast_arrays(as_points(z), as_points(w))
    shape = z.shape[:-1]
    z = z.reshape(-1, 2)
    w = w.reshape(-1, 2)
    rho = np.zeros(len(z))
    theta = np.zeros(len(z))
    same = np.all(z == w, axis=-1)
    todo = np.flatnonzero(~same)
    chunk = max(1, _CHUNK // grid.n)
    for start in range(0, len(todo), chunk):
        sel = todo[start:start + chunk]
        rho[sel], theta[sel] = _c_g2_block(z[sel], w[sel], grid)
    return rho.reshape(shape), theta.reshape(shape)


def _require_in_g2(pts, tol=GAUGE_TOL):
    if np.any(g2_margin(pts) <= tol):
        raise DomainError("points must lie inside G2")


def c_g2(z, w, grid: CircleGrid = CircleGrid()) -> DistanceValue:
    """Caratheodory distance of G2 between two points, maximized over |tau| = 1."""
    z = as_points(z)
    w = as_points(w)
    _require_in_g2(np.stack([z, w]))
    rho, theta = c_g2_rho(z, w, grid)
    rho = float(rho)
    return DistanceValue(rho, float(np.arctanh(rho)), complex(np.exp(1j * theta)))


def _bidisc_lower_bound(z, pts):
    # G2 sits inside the polydisc 2D x D, whose distance is the coordinate max
    return np.maximum(_mobius_raw(z[0] / 2, pts[:, 0] / 2), _mobius_raw(z[1], pts[:, 1]))


def dist_to_compact(z, K, grid: CircleGrid = CircleGrid(), block: int = 256) -> float:
    """min over the sample of K of tanh c_G2(z, w).

    ``K`` is a CompactSetSample or an array of points.  Candidates are
    visited in order of a cheap lower bound (the distance of the bidisc
    2D x D containing G2) and the scan stops once that bound exceeds the
    best value found.
    """
    pts = as_points(getattr(K, "points", K)).reshape(-1, 2)
    if len(pts) == 0:
        raise EmptyCompactSet("compact set sample is empty")
    z = as_points(z)
    _require_in_g2(z)
    lower = _bidisc_lower_bound(z, pts)
    order = np.argsort(lower, kind="stable")
    first = order[:block]
    rho, _ = c_g2_rho(z[None, :], pts[first], grid)
    best = float(rho.min())
    rest = order[block:]
    rest = rest[lower[rest] < best]
    if len(rest) == 0:
        return best
    # every coarse tau lies on the grid, so this never exceeds the refined value
    coarse = grid.angles[:: max(1, grid.n // 16)]
    tighter = np.maximum(lower[rest], _profile(z[None, None, :], pts[rest][:, None, :], coarse[None, :]).max(axis=1))
    keep = np.argsort(tighter, kind="stable")
    rest, tighter = rest[keep], tighter[keep]
    for start in range(0, len(rest), block):
        if tighter[start] >= best:
            break
        rho, _ = c_g2_rho(z[None, :], pts[rest[start:start + block]], grid)
        best = min(best, float(rho.min()))
    return best


def c_origin_sandwich(z, domain: DomainSpec, d: DegreeVector = DegreeVector(), tol: float = GAUGE_TOL):
    """Bounds atanh(h**L) <= c(0, z) <= atanh(h) from the d-gauge h."""
    h = d_minkowski(z, domain, d, tol)
    if np.any(np.asarray(h) >= 1):
        raise DomainError("point lies outside the domain")
    return np.arctanh(h ** d.L), np.arctanh(h)
