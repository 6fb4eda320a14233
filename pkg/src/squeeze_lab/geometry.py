"""Domains in C^2, membership tests and d-Minkowski gauges.

Points are handled either as :class:`Point2C` tuples or, for the vectorized
routines, as complex arrays whose last axis has length 2 (``z[..., 0]`` is the
first coordinate, ``z[..., 1]`` the second).

Four domains are supported: the symmetrized bidisc ``G2``, its convex hull,
a polydisc of radius ``r`` centred at the origin and Euclidean balls.
The closure of ``conv(G2)`` is the convex hull of the curve
``w -> (2w, w**2)``, |w| = 1, which gives the exact fibre description

    conv(G2) = {(s, p) : |p - s**2/4| < 1 - |s|**2/4}

used both for membership and for the closed-form (1, 2)-gauge
``sqrt(|s|**2/4 + |p - s**2/4|)``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import NamedTuple, Optional, Sequence

import numpy as np

from .errors import (
    BracketingFailed,
    CertificateSearchFailed,
    DomainError,
    NotBalancedError,
)

GAUGE_TOL = 1e-9
SUPPORT_TOL = 1e-6
T_MAX = 4.0


class Point2C(NamedTuple):
    z1: complex
    z2: complex


def as_points(z) -> np.ndarray:
    """Coerce ``z`` to a complex array of shape (..., 2), rejecting non-finite input."""
    arr = np.asarray(z, dtype=complex)
    if arr.shape == () or arr.shape[-1] != 2:
        raise DomainError(f"expected points with a trailing axis of length 2, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise DomainError("points must have finite coordinates")
    return arr


def _point(z) -> Point2C:
    arr = as_points(z)
    if arr.shape != (2,):
        raise DomainError("expected a single point")
    return Point2C(complex(arr[0]), complex(arr[1]))


@dataclass(frozen=True)
class DegreeVector:
    """Weights d = (d1, d2) of the action (lam**d1 z1, lam**d2 z2)."""

    d1: int = 1
    d2: int = 2

    def __post_init__(self):
        for v in (self.d1, self.d2):
            if int(v) != v or v < 1:
                raise ValueError(f"degrees must be positive integers, got {(self.d1, self.d2)}")

    @property
    def L(self) -> int:
        return max(self.d1, self.d2)

    def as_array(self) -> np.ndarray:
        return np.array([self.d1, self.d2], dtype=float)


class Status(str, enum.Enum):
    INSIDE = "inside"
    OUTSIDE = "outside"
    BOUNDARY = "boundary"


@dataclass(frozen=True)
class MembershipVerdict:
    status: Status
    margin: float
    certificate: Optional[tuple] = None  # ((weight, Point2C), ...)

    def __post_init__(self):
        if self.certificate is not None and self.status is not Status.INSIDE:
            raise ValueError("only Inside verdicts may carry a certificate")


def _verdict_from_margin(margin: float, tol: float) -> Status:
    if margin > tol:
        return Status.INSIDE
    if margin < -tol:
        return Status.OUTSIDE
    return Status.BOUNDARY


# ---------------------------------------------------------------------------
# symmetrized bidisc
# ---------------------------------------------------------------------------

def _ldexp(x, k):
    return np.ldexp(x.real, k) + 1j * np.ldexp(x.imag, k)


def _root_pair(s, p):
    """Roots of t**2 - s t + p, vectorized, computed without cancellation."""
    s = np.asarray(s, dtype=complex)
    p = np.asarray(p, dtype=complex)
    # rescale by a power of two so that extreme magnitudes neither over- nor underflow
    m = np.maximum(np.abs(s), np.sqrt(np.abs(p)))
    k = np.where(np.isfinite(m) & (m > 0), np.frexp(np.where(m > 0, m, 1.0))[1], 0)
    s = _ldexp(s, -k)
    p = _ldexp(p, -2 * k)
    disc = np.sqrt(s * s - 4.0 * p)
    flip = np.real(np.conj(s) * disc) < 0
    big = 0.5 * (s + np.where(flip, -disc, disc))
    with np.errstate(divide="ignore", invalid="ignore"):
        small = np.where(big == 0, 0.0, p / np.where(big == 0, 1.0, big))
    return _ldexp(big, k), _ldexp(small, k)


def quadratic_roots(s: complex, p: complex) -> tuple[complex, complex]:
    """Return (t1, t2) with t1 + t2 = s and t1 t2 = p, ordered by (real, imag)."""
    big, small = _root_pair(s, p)
    roots = sorted((complex(big), complex(small)), key=lambda t: (t.real, t.imag))
    return roots[0], roots[1]


def g2_margin(z) -> np.ndarray:
    """1 - max root modulus of t**2 - z1 t + z2; positive exactly on G2."""
    z = as_points(z)
    big, small = _root_pair(z[..., 0], z[..., 1])
    return 1.0 - np.maximum(np.abs(big), np.abs(small))


def g2_contains(z, tol: float = GAUGE_TOL) -> MembershipVerdict:
    if tol <= 0:
        raise ValueError("tol must be positive")
    margin = float(g2_margin(_point(z)))
    return MembershipVerdict(_verdict_from_margin(margin, tol), margin)


def symmetrize(x, y):
    """The map (x, y) -> (x + y, x y), vectorized; returns an array (..., 2)."""
    x = np.asarray(x, dtype=complex)
    y = np.asarray(y, dtype=complex)
    return np.stack(np.broadcast_arrays(x + y, x * y), axis=-1)


def sample_g2(n: int, radius_max: float = 0.99) -> np.ndarray:
    """Image of an n x n x n x n polar grid of the bidisc under symmetrization.

    Radii run over ``radius_max * k / (n - 1)``, so the origin is included.
    Returns an array of shape (n**4, 2).
    """
    if n < 2:
        raise ValueError("n must be at least 2")
    if not 0 < radius_max < 1:
        raise ValueError("radius_max must lie in (0, 1)")
    radii = radius_max * np.arange(n) / (n - 1)
    angles = 2 * np.pi * np.arange(n) / n
    disc = (radii[:, None] * np.exp(1j * angles)[None, :]).ravel()
    x, y = np.meshgrid(disc, disc, indexing="ij")
    return symmetrize(x.ravel(), y.ravel())


# ---------------------------------------------------------------------------
# convex hull of G2
# ---------------------------------------------------------------------------

def conv_g2_margin(z) -> np.ndarray:
    """(1 - |s/2|**2) - |p - s**2/4|; positive exactly on conv(G2)."""
    z = as_points(z)
    a = 0.5 * z[..., 0]
    return (1.0 - np.abs(a) ** 2) - np.abs(z[..., 1] - a * a)


def conv_g2_gauge(z) -> np.ndarray:
    """Closed-form (1, 2)-Minkowski gauge of conv(G2)."""
    z = as_points(z)
    s, p = z[..., 0], z[..., 1]
    return np.sqrt(np.abs(s) ** 2 / 4.0 + np.abs(p - s * s / 4.0))


def _golden_max(f, lo, hi, iters):
    """Vectorized golden-section search for maxima of ``f`` on [lo, hi].

    Returns the best abscissa and value seen over all evaluations, so the
    result never decreases as ``iters`` grows.
    """
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    lo = np.array(lo, dtype=float)
    hi = np.array(hi, dtype=float)
    x1 = hi - invphi * (hi - lo)
    x2 = lo + invphi * (hi - lo)
    f1, f2 = f(x1), f(x2)
    best_x = np.where(f1 >= f2, x1, x2)
    best_f = np.maximum(f1, f2)
    for _ in range(iters):
        left = f1 >= f2
        # keep [lo, x2] where f1 wins, [x1, hi] otherwise
        hi = np.where(left, x2, hi)
        lo = np.where(left, lo, x1)
        new_x = np.where(left, hi - invphi * (hi - lo), lo + invphi * (hi - lo))
        new_f = f(new_x)
        x1, x2, f1, f2 = (
            np.where(left, new_x, x2),
            np.where(left, x1, new_x),
            np.where(left, new_f, f2),
            np.where(left, f1, new_f),
        )
        better = new_f > best_f
        best_x = np.where(better, new_x, best_x)
        best_f = np.where(better, new_f, best_f)
    return best_x, best_f


def _top_local_maxima(values: np.ndarray, k: int) -> np.ndarray:
    """Indices of the k largest circular local maxima along the last axis."""
    left = np.roll(values, 1, axis=-1)
    right = np.roll(values, -1, axis=-1)
    peaks = np.where((values >= left) & (values >= right), values, -np.inf)
    k = min(k, values.shape[-1])
    order = np.argsort(-peaks, axis=-1, kind="stable")[..., :k]
    # rows with fewer than k peaks fall back to the global maximum
    top = np.take_along_axis(peaks, order, axis=-1)
    fallback = np.argmax(values, axis=-1)[..., None]
    return np.where(np.isfinite(top), order, fallback)


def _support_profile(a, b, theta):
    return np.real(np.conj(a) * np.exp(1j * theta)) + np.abs(a + b * np.exp(-1j * theta))


def support_conv_g2(direction: Sequence[float], refine_iters: int = 40, n_grid: int = 256) -> float:
    """Support function of conv(G2) in a unit direction of R^4.

    The direction (u0, u1, u2, u3) pairs with (Re z1, Im z1, Re z2, Im z2).
    A linear functional attains its maximum over the closed bidisc on the
    torus; maximizing out the second angle in closed form leaves the
    one-dimensional profile ``Re(conj(a) e^{it}) + |a + b e^{-it}|`` which is
    scanned on a grid and refined by golden-section search.
    """
    u = np.asarray(direction, dtype=float)
    if u.shape != (4,):
        raise ValueError("direction must be a 4-vector")
    if abs(np.linalg.norm(u) - 1.0) > 1e-9:
        raise ValueError("direction must have unit Euclidean norm")
    a = complex(u[0], u[1])
    b = complex(u[2], u[3])
    theta = 2 * np.pi * np.arange(n_grid) / n_grid
    vals = _support_profile(a, b, theta)
    best = float(vals.max())
    if refine_iters > 0:
        step = 2 * np.pi / n_grid
        idx = _top_local_maxima(vals, 3)
        _, refined = _golden_max(lambda t: _support_profile(a, b, t),
                                 theta[idx] - step, theta[idx] + step, refine_iters)
        best = max(best, float(refined.max()))
    return best


def _separating_direction(z: Point2C) -> np.ndarray:
    """Unit direction from the smallest eigenvector of the Toeplitz moment matrix.

    With c1 = z1/2, c2 = z2 the matrix [[1, c1, c2], [c1*, 1, c1], [c2*, c1*, 1]]
    is positive semidefinite on the closed hull, and v* T v >= 0 is a linear
    inequality in (z1, z2).
    """
    c1, c2 = 0.5 * z.z1, z.z2
    T = np.array([[1, c1, c2],
                  [np.conj(c1), 1, c1],
                  [np.conj(c2), np.conj(c1), 1]], dtype=complex)
    _, vecs = np.linalg.eigh(T)
    v = vecs[:, 0]
    g1 = np.conj(v[0]) * v[1] + np.conj(v[1]) * v[2]
    g2 = np.conj(v[0]) * v[2]
    # v*Tv = |v|^2 + Re(z1 g1) + 2 Re(z2 g2), so Re(conj(a) z1 + conj(b) z2) <= |v|^2
    a = -np.conj(g1)
    b = -2.0 * np.conj(g2)
    u = np.array([a.real, a.imag, b.real, b.imag])
    return u / np.linalg.norm(u)


def _chord_atoms(a: complex, b: complex):
    """Two unit-circle atoms with weights whose first/second moments are (a, b).

    Requires |b - a**2| = 1 - |a|**2 (a boundary point of the moment set).
    """
    R = 1.0 - abs(a) ** 2
    dev = b - a * a
    phase = dev / abs(dev) if abs(dev) > 0 else 1.0
    delta = np.sqrt(phase)
    proj = (np.conj(a) * delta).real
    root = math.sqrt(max(proj * proj + R, 0.0))
    t1, t2 = -proj + root, -proj - root
    if t1 == t2:
        return [(1.0, a + t1 * delta)]
    w1 = -t2 / (t1 - t2)
    return [(w1, a + t1 * delta), (1.0 - w1, a + t2 * delta)]


def _hull_certificate(z: Point2C, rho: float):
    """Convex combination of points of G2 equal to ``z``.

    Every atom is (2 rho w, rho**2 w**2) = symmetrize(rho w, rho w) with |w| = 1,
    so it lies in G2 whenever rho < 1.  Requires gauge(z) < rho.
    """
    a = 0.5 * z.z1 / rho
    b = z.z2 / rho**2
    R = 1.0 - abs(a) ** 2
    dev = b - a * a
    direction = dev / abs(dev) if abs(dev) > 0 else 1.0
    mu = 0.5 * (1.0 + abs(dev) / R)
    cert = []
    for weight, end in ((mu, a * a + R * direction), (1.0 - mu, a * a - R * direction)):
        if weight == 0:
            continue
        for w_atom, atom in _chord_atoms(a, end):
            atom = atom / abs(atom)
            x = rho * atom
            cert.append((weight * w_atom, Point2C(complex(2 * x), complex(x * x))))
    return tuple(cert)


def _check_certificate(z: Point2C, cert, tol: float) -> bool:
    weights = np.array([w for w, _ in cert])
    pts = np.array([tuple(p) for _, p in cert], dtype=complex)
    if np.any(weights < -tol) or np.any(weights > 1 + tol):
        return False
    if abs(weights.sum() - 1.0) > tol:
        return False
    if np.any(g2_margin(pts) <= tol):
        return False
    recon = weights @ pts
    return bool(np.all(np.abs(recon - np.array(z, dtype=complex)) <= tol))


def conv_g2_contains(z, tol: float = SUPPORT_TOL, max_points: int = 5) -> MembershipVerdict:
    """Certified membership test for conv(G2).

    Inside verdicts carry a convex combination of at most ``max_points``
    points of G2 that reproduces ``z`` to ``tol``; Outside verdicts are backed
    by a direction whose independently computed support value is exceeded
    by more than ``tol``.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    z = _point(z)
    gauge = float(conv_g2_gauge(z))
    if gauge < 1.0 - tol:
        rho = 0.5 * (gauge + 1.0 - tol)
        cert = _hull_certificate(z, rho)
        if len(cert) <= max_points and _check_certificate(z, cert, tol):
            return MembershipVerdict(Status.INSIDE, 1.0 - gauge, cert)
        raise CertificateSearchFailed(f"certificate for {z} failed verification")
    u = _separating_direction(z)
    x = np.array([z.z1.real, z.z1.imag, z.z2.real, z.z2.imag])
    separation = float(u @ x) - support_conv_g2(u)
    if separation > tol:
        return MembershipVerdict(Status.OUTSIDE, -separation)
    if gauge > 1.0 + 100 * tol:
        raise CertificateSearchFailed(
            f"{z} has gauge {gauge} but no separating direction beyond tol={tol}")
    return MembershipVerdict(Status.BOUNDARY, 1.0 - gauge)


# ---------------------------------------------------------------------------
# domain descriptors and d-gauges
# ---------------------------------------------------------------------------

class DomainKind(str, enum.Enum):
    SYMMETRIZED_BIDISC = "g2"
    CONV_HULL_G2 = "conv_g2"
    POLYDISC = "polydisc"
    BALL = "ball"


@dataclass(frozen=True)
class DomainSpec:
    kind: DomainKind
    radius: float = 1.0
    center: tuple = (0j, 0j)
    tol: float = GAUGE_TOL

    def __post_init__(self):
        if self.tol <= 0:
            raise ValueError("tol must be positive")
        if self.kind is DomainKind.POLYDISC and not 0 < self.radius < 1:
            raise ValueError("polydisc radius must lie in (0, 1)")
        if self.kind is DomainKind.BALL and self.radius <= 0:
            raise ValueError("ball radius must be positive")

    @classmethod
    def symmetrized_bidisc(cls, tol=GAUGE_TOL):
        return cls(DomainKind.SYMMETRIZED_BIDISC, tol=tol)

    @classmethod
    def conv_hull_g2(cls, tol=GAUGE_TOL):
        return cls(DomainKind.CONV_HULL_G2, tol=tol)

    @classmethod
    def polydisc(cls, r, tol=GAUGE_TOL):
        return cls(DomainKind.POLYDISC, radius=float(r), tol=tol)

    @classmethod
    def ball(cls, center, radius, tol=GAUGE_TOL):
        c = _point(center)
        return cls(DomainKind.BALL, radius=float(radius), center=(c.z1, c.z2), tol=tol)

    def margin(self, z) -> np.ndarray:
        """Signed margin, positive exactly on the (open) domain."""
        z = as_points(z)
        if self.kind is DomainKind.SYMMETRIZED_BIDISC:
            return g2_margin(z)
        if self.kind is DomainKind.CONV_HULL_G2:
            return conv_g2_margin(z)
        if self.kind is DomainKind.POLYDISC:
            return self.radius - np.max(np.abs(z), axis=-1)
        c = np.array(self.center, dtype=complex)
        return self.radius - np.linalg.norm(z - c, axis=-1)

    def contains(self, z) -> np.ndarray:
        return self.margin(z) > 0

    def verdict(self, z) -> MembershipVerdict:
        margin = float(self.margin(_point(z)))
        return MembershipVerdict(_verdict_from_margin(margin, self.tol), margin)

    def is_balanced(self, d: DegreeVector) -> bool:
        if self.kind in (DomainKind.SYMMETRIZED_BIDISC, DomainKind.CONV_HULL_G2):
            return d.d2 == 2 * d.d1
        if self.kind is DomainKind.BALL:
            return self.center == (0j, 0j)
        return True

    def closed_form_gauge(self, z, d: DegreeVector) -> Optional[np.ndarray]:
        """Exact d-gauge where one is known, else None."""
        z = as_points(z)
        if self.kind is DomainKind.POLYDISC:
            return np.max((np.abs(z) / self.radius) ** (1.0 / d.as_array()), axis=-1)
        if self.kind in (DomainKind.SYMMETRIZED_BIDISC, DomainKind.CONV_HULL_G2) and self.is_balanced(d):
            # the (k, 2k) action of lam is the (1, 2) action of lam**k
            if self.kind is DomainKind.SYMMETRIZED_BIDISC:
                big, small = _root_pair(z[..., 0], z[..., 1])
                h = np.maximum(np.abs(big), np.abs(small))
            else:
                h = conv_g2_gauge(z)
            return h ** (1.0 / d.d1)
        if self.kind is DomainKind.BALL and self.is_balanced(d) and (d.d1, d.d2) in ((1, 1), (1, 2)):
            x = np.abs(z[..., 0]) ** 2
            y = np.abs(z[..., 1]) ** 2
            R2 = self.radius**2
            if d.d2 == 1:
                return np.sqrt((x + y) / R2)
            return np.sqrt((x + np.sqrt(x * x + 4 * R2 * y)) / (2 * R2))
        return None


def d_action(z, lam: complex, d: DegreeVector = DegreeVector()) -> np.ndarray:
    """(lam**d1 z1, lam**d2 z2)."""
    z = as_points(z)
    lam = np.asarray(lam, dtype=complex)[..., None]
    powers = d.as_array().astype(int)
    return z * lam ** powers


def _scaled(z: np.ndarray, t: np.ndarray, d: DegreeVector) -> np.ndarray:
    return z / t[..., None] ** d.as_array()


def d_minkowski(z, domain: DomainSpec, d: DegreeVector = DegreeVector(), tol: Optional[float] = None):
    """d-Minkowski gauge inf{t > 0 : (z1/t**d1, z2/t**d2) in domain} by bisection.

    Accepts a single point or an array of points (..., 2); the bracket is
    [0, T_MAX] and each result is within ``tol`` of the crossing.
    """
    tol = domain.tol if tol is None else tol
    if tol <= 0:
        raise ValueError("tol must be positive")
    if not domain.is_balanced(d):
        raise NotBalancedError(f"{domain.kind.value} is not {(d.d1, d.d2)}-balanced")
    pts = as_points(z)
    single = pts.ndim == 1
    pts = np.atleast_2d(pts)
    batch = pts.reshape(-1, 2)
    zero = np.all(batch == 0, axis=-1)
    lo = np.zeros(len(batch))
    hi = np.full(len(batch), T_MAX)
    outside = ~domain.contains(_scaled(batch, hi, d)) & ~zero
    if np.any(outside):
        bad = batch[np.argmax(outside)]
        raise BracketingFailed(f"point {tuple(bad)} is not captured by t <= {T_MAX}")
    n_iter = max(1, math.ceil(math.log2(T_MAX / tol)))
    for _ in range(n_iter):
        mid = 0.5 * (lo + hi)
        inside = domain.contains(_scaled(batch, mid, d))
        hi = np.where(inside, mid, hi)
        lo = np.where(inside, lo, mid)
    h = np.where(zero, 0.0, 0.5 * (lo + hi)).reshape(pts.shape[:-1])
    return float(h[0]) if single else h


def d_sublevel_contains(z, domain: DomainSpec, d: DegreeVector = DegreeVector(),
                        level: float = 1.0, tol: Optional[float] = None):
    """Membership in the open sublevel set {h_{d,domain} < level}."""
    if not 0 < level <= 1:
        raise ValueError("level must lie in (0, 1]")
    tol = domain.tol if tol is None else tol
    h = d_minkowski(z, domain, d, tol)
    return h < level - tol
