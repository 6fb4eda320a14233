"""Bounds on the (1, 2)-balanced squeezing function of D = conv(G2) minus K.

K is the boundary of the polydisc of radius r with a small ball around
Q = (0, r) removed.  The squeezing function itself is never computed; only
certified lower and upper bounds are, and the maximum-principle verdict on
the slice {z2 = 0} is decided from them.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import CertificationFailed, DomainError, EmptyCompactSet
from .geometry import (
    GAUGE_TOL,
    DegreeVector,
    DomainSpec,
    d_minkowski,
    g2_margin,
)
from .metrics import CircleGrid, c_g2_rho, dist_to_compact

VERDICT_MARGIN = 1e-12

AMBIGUITIES = (
    "extremal map phi_tau: denominator taken as 2 - tau*z1; the printed 2 - tau*z2 is "
    "inconsistent with the expansion (2 - tau*z1)(2 - tau*w1) used to bound the Mobius quotient",
    "origin lower bound: stated as 1/2, the containment argument gives r/2; r/2 is used",
    "slice upper bound: one summary writes the denominator 2 - r|z1|, the derivation gives "
    "1 - r|z1|; 1 - r|z1| is used",
    "excluded ball around Q: written with radius r but described with radius eps; eps is used",
    "w0 in K: checked directly, w0 = (r z1/|z1|, 0) lies on |z1| = r at distance "
    "r*sqrt(2) > eps from Q",
    "slice H: taken to be the complex line {z2 = 0}",
)


@dataclass(frozen=True)
class CounterexampleConfig:
    r: float = 0.4
    eps: float = 0.05
    k_density: int = 64
    slice_points: int = 16
    slice_angles: int = 4
    grid: CircleGrid = field(default_factory=CircleGrid)
    tol: float = GAUGE_TOL

    def __post_init__(self):
        if not 0 < self.r < 0.5:
            raise ValueError(f"r must lie in (0, 1/2), got {self.r}")
        if not 0 < self.eps < self.r:
            raise ValueError(f"eps must lie in (0, r), got {self.eps}")
        if self.k_density < 4:
            raise ValueError("k_density must be at least 4")
        if self.slice_points < 1 or self.slice_angles < 1:
            raise ValueError("slice grid must be non-empty")

    @property
    def d(self) -> DegreeVector:
        return DegreeVector(1, 2)

    @property
    def Q(self) -> tuple:
        return (0j, complex(self.r))


class Provenance(str, enum.Enum):
    CLOSED_FORM = "closed_form"
    NUMERIC_K = "numeric_k"
    ORIGIN_CERTIFICATE = "origin_certificate"


@dataclass(frozen=True)
class BoundInterval:
    lower: float
    upper: float
    provenance: Provenance


@dataclass(frozen=True)
class CompactSetSample:
    """Sample of K = boundary of D^2(0, r) minus B^2(Q, eps).

    ``faces`` is 0 for points on {|z1| = r} and 1 for points on {|z2| = r}.
    """

    points: np.ndarray
    faces: np.ndarray
    r: float
    eps: float

    def __len__(self):
        return len(self.points)

    def subset(self, mask) -> "CompactSetSample":
        return CompactSetSample(self.points[mask], self.faces[mask], self.r, self.eps)


def _disc_grid(radius, n_radii, n_angles, include_rim=True):
    stop = n_radii + 1 if include_rim else n_radii
    pts = [0j]
    for k in range(1, stop):
        rho = radius * k / n_radii
        pts.extend(rho * np.exp(2j * np.pi * np.arange(n_angles) / n_angles))
    return np.array(pts)


def build_K(cfg: CounterexampleConfig) -> CompactSetSample:
    """Polar-grid sample of both faces of the polydisc boundary, minus the eps-ball at Q.

    ``k_density`` angles are used on each circle and ``k_density // 8`` radii
    (at least 2) on each disc; the torus |z1| = |z2| = r is assigned to the
    first face only.
    """
    r, n = cfg.r, cfg.k_density
    m = max(2, n // 8)
    rim = r * np.exp(2j * np.pi * np.arange(n) / n)
    face_a = np.stack(np.broadcast_arrays(rim[:, None], _disc_grid(r, m, n)[None, :]), axis=-1)
    face_b = np.stack(np.broadcast_arrays(_disc_grid(r, m, n, include_rim=False)[None, :], rim[:, None]), axis=-1)
    points = np.concatenate([face_a.reshape(-1, 2), face_b.reshape(-1, 2)])
    faces = np.concatenate([np.zeros(face_a.shape[0] * face_a.shape[1], dtype=int),
                            np.ones(face_b.shape[0] * face_b.shape[1], dtype=int)])
    keep = np.linalg.norm(points - np.array(cfg.Q), axis=-1) >= cfg.eps
    sample = CompactSetSample(points[keep], faces[keep], r, cfg.eps)
    if len(sample) == 0:
        raise EmptyCompactSet(f"eps={cfg.eps} removes every sample point")
    assert np.all(np.abs(np.max(np.abs(sample.points), axis=-1) - r) <= 1e-12)
    assert np.all(g2_margin(sample.points) > cfg.tol), "K must lie inside G2 for r < 1/2"
    return sample


@dataclass(frozen=True)
class OriginCertificate:
    n_points: int
    n_sublevel: int
    max_abs_z1: float
    max_abs_z2: float


def certify_origin_sublevel(cfg: CounterexampleConfig, certification_grid: int = 10_000) -> OriginCertificate:
    """Check that {h < r/2} on conv(G2) avoids the polydisc boundary.

    Points of a polar product grid covering |z1| <= 1.25 r, |z2| <= 1.25 r**2/4
    are tested; each one in the sublevel set must satisfy |z1| < r and
    |z2| < r**2/4.
    """
    m = max(2, round(certification_grid ** 0.25))
    ang = np.exp(2j * np.pi * np.arange(m) / m)
    c1 = (1.25 * cfg.r * np.arange(m) / (m - 1))[:, None] * ang[None, :]
    c2 = (1.25 * cfg.r**2 / 4 * np.arange(m) / (m - 1))[:, None] * ang[None, :]
    a, b = np.meshgrid(c1.ravel(), c2.ravel(), indexing="ij")
    pts = np.stack([a.ravel(), b.ravel()], axis=-1)
    h = d_minkowski(pts, DomainSpec.conv_hull_g2(cfg.tol), cfg.d, cfg.tol)
    inside = h < cfg.r / 2 - cfg.tol
    sub = pts[inside]
    bad = (np.abs(sub[:, 0]) >= cfg.r) | (np.abs(sub[:, 1]) >= cfg.r**2 / 4)
    if np.any(bad):
        p = sub[np.argmax(bad)]
        raise CertificationFailed(f"sublevel point {tuple(p)} reaches the polydisc boundary", tuple(p))
    return OriginCertificate(len(pts), int(inside.sum()),
                             float(np.abs(sub[:, 0]).max()), float(np.abs(sub[:, 1]).max()))


def sq_lower_origin(cfg: CounterexampleConfig, certification_grid: int = 10_000) -> BoundInterval:
    """S(0) >= r/2: the identity map already contains the sublevel set {h < r/2}."""
    certify_origin_sublevel(cfg, certification_grid)
    return BoundInterval(cfg.r / 2, 1.0, Provenance.ORIGIN_CERTIFICATE)


def _slice_bound(x, r):
    return np.sqrt((r - x) / (1 - r * x))


def sq_upper_closed_form(z1, cfg: CounterexampleConfig) -> BoundInterval:
    """S((z1, 0)) <= sqrt((r - |z1|) / (1 - r|z1|))."""
    x = abs(complex(z1))
    if not 0 < x < cfg.r:
        raise DomainError(f"|z1| must lie in (0, r), got {x}")
    return BoundInterval(0.0, float(_slice_bound(x, cfg.r)), Provenance.CLOSED_FORM)


def sq_upper_numeric(z, K: CompactSetSample, cfg: CounterexampleConfig,
                     grid: Optional[CircleGrid] = None) -> BoundInterval:
    """S(z) <= sqrt(min_K tanh c_G2(z, w)).

    conv(G2) contains G2, so its Caratheodory distance is at most that of G2,
    and minimizing over a subset of K can only raise the minimum; the value
    is therefore an upper bound up to the resolution of the tau grid.
    """
    grid = cfg.grid if grid is None else grid
    value = dist_to_compact(z, K, grid)
    return BoundInterval(0.0, math.sqrt(value), Provenance.NUMERIC_K)


def beta_threshold(r: float) -> float:
    """Radius where sqrt((r - x)/(1 - r x)) crosses r/2."""
    if not 0 < r < 1:
        raise DomainError("r must lie in (0, 1)")
    return r * (4 - r) / (4 - r**3)


@dataclass(frozen=True)
class W0BoundRecord:
    z1: complex
    max_value: float
    argmax_tau: complex
    bound: float
    doubled_bound: float

    @property
    def passes(self) -> bool:
        return self.max_value <= self.bound

    @property
    def passes_doubled(self) -> bool:
        return self.max_value <= self.doubled_bound


def w0_bound_sweep(z1, cfg: CounterexampleConfig, grid: Optional[CircleGrid] = None) -> list:
    """Vectorized :func:`lemma33_check` over an array of first coordinates."""
    grid = cfg.grid if grid is None else grid
    z1 = np.atleast_1d(np.asarray(z1, dtype=complex))
    x = np.abs(z1)
    if np.any((x <= 0) | (x >= cfg.r)):
        raise DomainError("|z1| must lie in (0, r)")
    z = np.stack([z1, np.zeros_like(z1)], axis=-1)
    w0 = np.stack([cfg.r * z1 / x, np.zeros_like(z1)], axis=-1)
    rho, theta = c_g2_rho(z, w0, grid)
    bound = (cfg.r - x) / (1 - cfg.r * x)
    return [W0BoundRecord(complex(a), float(m), complex(np.exp(1j * t)), float(b), float(2 * b))
            for a, m, t, b in zip(z1, rho, theta, bound)]


def lemma33_check(z1, cfg: CounterexampleConfig, grid: Optional[CircleGrid] = None) -> W0BoundRecord:
    """Max over tau of the Mobius distance of phi_tau at (z1, 0) and w0 = (r z1/|z1|, 0)."""
    return w0_bound_sweep([z1], cfg, grid)[0]


@dataclass(frozen=True)
class SliceRow:
    radius: float
    angle: float
    closed_form: float
    numeric: float


class Verdict(str, enum.Enum):
    VIOLATED = "violated"
    NOT_VIOLATED = "not_violated"
    INDETERMINATE = "indeterminate"


@dataclass
class ViolationReport:
    r: float
    eps: float
    beta: float
    center_lower: float
    slice_upper: list
    verdict: Verdict
    ambiguity_log: list

    @property
    def violated(self) -> bool:
        return self.verdict is Verdict.VIOLATED

    @property
    def sup_upper(self) -> float:
        return max(max(row.closed_form, row.numeric) for row in self.slice_upper)


def slice_radii(cfg: CounterexampleConfig, beta: Optional[float] = None) -> np.ndarray:
    """Interior points of the annulus (beta, r) on the slice."""
    beta = beta_threshold(cfg.r) if beta is None else beta
    k = np.arange(1, cfg.slice_points + 1)
    return beta + (cfg.r - beta) * k / (cfg.slice_points + 1)


def psh_violation_report(cfg: CounterexampleConfig, K: Optional[CompactSetSample] = None,
                         beta: Optional[float] = None,
                         certification_grid: int = 10_000) -> ViolationReport:
    """Compare the origin lower bound with every slice upper bound on (beta, r).

    ``beta`` may be overridden to exercise the negative control.
    """
    K = build_K(cfg) if K is None else K
    beta = beta_threshold(cfg.r) if beta is None else beta
    center = sq_lower_origin(cfg, certification_grid).lower
    rows = []
    angles = 2 * np.pi * np.arange(cfg.slice_angles) / cfg.slice_angles
    for rad in slice_radii(cfg, beta):
        closed = sq_upper_closed_form(rad, cfg).upper
        for ang in angles:
            z = np.array([rad * np.exp(1j * ang), 0j])
            rows.append(SliceRow(float(rad), float(ang), closed, sq_upper_numeric(z, K, cfg).upper))
    sup = max(max(row.closed_form, row.numeric) for row in rows)
    if sup < center - VERDICT_MARGIN:
        verdict = Verdict.VIOLATED
    elif sup > center + VERDICT_MARGIN:
        verdict = Verdict.NOT_VIOLATED
    else:
        verdict = Verdict.INDETERMINATE
    log = list(AMBIGUITIES)
    records = w0_bound_sweep(slice_radii(cfg, beta_threshold(cfg.r)), cfg)
    log.append(
        f"w0 Mobius bound on the slice radii: {sum(r.passes for r in records)}/{len(records)} within "
        f"(r-|z1|)/(1-r|z1|), {sum(r.passes_doubled for r in records)}/{len(records)} within the doubled bound")
    return ViolationReport(cfg.r, cfg.eps, beta, center, rows, verdict, log)
