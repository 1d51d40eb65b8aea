"""Planar primitives: points, similarities, circles, and tolerance predicates.

Angles are never stored as radians anywhere in this package; oriented
angles live on the unit circle in the complex plane and angles that are
only known modulo pi are represented by their squared unit complex value.
All predicates take explicit tolerances so callers can rescale them for
configurations far from unit size.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .errors import CollinearInput, DegenerateSource, TooFewPoints

# Default tolerances, calibrated for unit-scale data.
EPS_UNIT = 1e-9        # |angle value| must be within this of 1
EPS_COLLINEAR = 1e-9   # relative sine below which three points count as collinear
EPS_RESID = 1e-9       # residual below which a point is "on" a fitted curve

# Unit-modulus complex numbers.  A DirectedAngle encodes an oriented angle
# as exp(i*theta); a DoubleAngle is its square and carries the angle only
# modulo pi (a line, not a ray).
DirectedAngle = complex
DoubleAngle = complex


def ensure_unit(value: complex, tol: float = EPS_UNIT) -> complex:
    """Validate that ``value`` is unit modulus and renormalize it exactly."""
    r = abs(value)
    if not math.isfinite(r) or abs(r - 1.0) > tol:
        raise ValueError(f"expected unit-modulus complex number, got |z| = {r!r}")
    return value / r


@dataclass(frozen=True)
class PlanarPoint:
    """A point of the real plane with finite coordinates."""

    x: float
    y: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError(f"non-finite coordinates ({self.x}, {self.y})")

    @property
    def z(self) -> complex:
        return complex(self.x, self.y)

    @classmethod
    def from_complex(cls, z: complex) -> "PlanarPoint":
        return cls(float(z.real), float(z.imag))

    def distance(self, other: "PlanarPoint") -> float:
        return math.hypot(self.x - other.x, self.y - other.y)


def as_complex(points) -> np.ndarray:
    """Complex view of a sequence of PlanarPoints."""
    return np.array([p.z for p in points], dtype=complex)


def from_complex_array(zs) -> tuple[PlanarPoint, ...]:
    return tuple(PlanarPoint.from_complex(complex(z)) for z in zs)


@dataclass(frozen=True)
class Similarity:
    """z -> a * z + b, optionally conjugating first (a reflection).

    ``a`` combines rotation and dilation; ``b`` is the translation.
    """

    a: complex
    b: complex
    mirrored: bool = False

    def __post_init__(self):
        if abs(self.a) == 0.0:
            raise ValueError("similarity scale must be nonzero")

    def apply_complex(self, z: complex) -> complex:
        if self.mirrored:
            z = z.conjugate()
        return self.a * z + self.b

    def apply(self, p: PlanarPoint) -> PlanarPoint:
        return PlanarPoint.from_complex(self.apply_complex(p.z))

    def apply_all(self, points) -> tuple[PlanarPoint, ...]:
        return tuple(self.apply(p) for p in points)

    def compose(self, inner: "Similarity") -> "Similarity":
        """Similarity equal to applying ``inner`` first, then ``self``."""
        if self.mirrored:
            a = self.a * inner.a.conjugate()
            b = self.a * inner.b.conjugate() + self.b
        else:
            a = self.a * inner.a
            b = self.a * inner.b + self.b
        return Similarity(a, b, self.mirrored != inner.mirrored)

    def inverse(self) -> "Similarity":
        if self.mirrored:
            return Similarity((1.0 / self.a).conjugate(), -(self.b / self.a).conjugate(), True)
        return Similarity(1.0 / self.a, -self.b / self.a, False)

    @classmethod
    def identity(cls) -> "Similarity":
        return cls(1.0 + 0.0j, 0.0j, False)


@dataclass(frozen=True)
class GeneralizedCircle:
    """Circle or line given by A(x^2 + y^2) + Bx + Cy + D = 0.

    The coefficient vector is normalized to unit Euclidean norm with the
    first nonzero entry positive, which makes equality of curves testable
    by comparing coefficients.  ``a == 0`` encodes a line.
    """

    a: float
    b: float
    c: float
    d: float

    def __post_init__(self):
        v = np.array([self.a, self.b, self.c, self.d], dtype=float)
        n = np.linalg.norm(v)
        if not (math.isfinite(n) and n > 0):
            raise ValueError("zero coefficient vector")
        if abs(n - 1.0) > 1e-9:
            raise ValueError("coefficients must be normalized; use from_coefficients")
        if abs(self.a) > 1e-14 and self.b**2 + self.c**2 - 4 * self.a * self.d <= 0:
            raise ValueError("coefficients do not describe a real circle")

    @classmethod
    def from_coefficients(cls, a: float, b: float, c: float, d: float) -> "GeneralizedCircle":
        v = np.array([a, b, c, d], dtype=float)
        n = np.linalg.norm(v)
        if n == 0:
            raise ValueError("zero coefficient vector")
        v = v / n
        for entry in v:
            if abs(entry) > 1e-14:
                if entry < 0:
                    v = -v
                break
        return cls(*(float(t) for t in v))

    @property
    def is_line(self) -> bool:
        return abs(self.a) <= 1e-14

    def evaluate(self, p: PlanarPoint) -> float:
        return self.a * (p.x * p.x + p.y * p.y) + self.b * p.x + self.c * p.y + self.d

    def center(self) -> PlanarPoint:
        if self.is_line:
            raise ValueError("a line has no center")
        return PlanarPoint(-self.b / (2 * self.a), -self.c / (2 * self.a))

    def radius(self) -> float:
        if self.is_line:
            return math.inf
        return math.sqrt(self.b**2 + self.c**2 - 4 * self.a * self.d) / (2 * abs(self.a))

    def distance(self, p: PlanarPoint) -> float:
        """Geometric distance from ``p`` to the curve."""
        if self.is_line:
            return abs(self.b * p.x + self.c * p.y + self.d) / math.hypot(self.b, self.c)
        return abs(p.distance(self.center()) - self.radius())

    def side(self, p: PlanarPoint) -> float:
        """Negative inside the circle, positive outside (signed half-plane for lines)."""
        if self.is_line:
            return self.b * p.x + self.c * p.y + self.d
        return math.copysign(1.0, self.a) * self.evaluate(p)

    def contains(self, p: PlanarPoint, tol: float = EPS_RESID) -> bool:
        return self.distance(p) < tol


def _cross(o: complex, u: complex, v: complex) -> float:
    """Twice the signed area of the triangle (o, u, v)."""
    return ((u - o) * (v - o).conjugate()).imag


def collinearity(a: PlanarPoint, b: PlanarPoint, c: PlanarPoint) -> float:
    """Relative sine of the triangle: 0 for collinear, up to 1 for a right turn."""
    num = abs(_cross(a.z, b.z, c.z))
    den = abs(b.z - a.z) * abs(c.z - a.z)
    if den == 0:
        return 0.0
    return num / den


def circumcenter(a: PlanarPoint, b: PlanarPoint, c: PlanarPoint,
                 tol: float = EPS_COLLINEAR) -> PlanarPoint:
    """Center of the circle through three points.

    Raises CollinearInput when the points are collinear within ``tol``
    (measured as the relative sine of the spanned triangle).
    """
    if collinearity(a, b, c) < tol:
        raise CollinearInput(f"no circumcenter: {a}, {b}, {c} are collinear")
    d = 2.0 * (a.x * (b.y - c.y) + b.x * (c.y - a.y) + c.x * (a.y - b.y))
    sa, sb, sc = a.x**2 + a.y**2, b.x**2 + b.y**2, c.x**2 + c.y**2
    ux = (sa * (b.y - c.y) + sb * (c.y - a.y) + sc * (a.y - b.y)) / d
    uy = (sa * (c.x - b.x) + sb * (a.x - c.x) + sc * (b.x - a.x)) / d
    return PlanarPoint(ux, uy)


def circle_through(a: PlanarPoint, b: PlanarPoint, c: PlanarPoint) -> GeneralizedCircle:
    """Circle through three points, degrading to the line through them
    when they are collinear."""
    if collinearity(a, b, c) < EPS_COLLINEAR:
        # pick the farthest pair for a stable line direction
        pts = [a, b, c]
        (p, q) = max(itertools.combinations(pts, 2), key=lambda pq: pq[0].distance(pq[1]))
        if p.distance(q) == 0:
            raise ValueError("cannot fit a line through coincident points")
        bb = q.y - p.y
        cc = p.x - q.x
        dd = -(bb * p.x + cc * p.y)
        return GeneralizedCircle.from_coefficients(0.0, bb, cc, dd)
    o = circumcenter(a, b, c, tol=0.0)
    r2 = (a.x - o.x) ** 2 + (a.y - o.y) ** 2
    # (x - ox)^2 + (y - oy)^2 = r^2
    return GeneralizedCircle.from_coefficients(
        1.0, -2.0 * o.x, -2.0 * o.y, o.x**2 + o.y**2 - r2
    )


def fit_generalized_circle(points) -> GeneralizedCircle:
    """Total-least-squares circle-or-line through any number of points.

    Smallest singular vector of the [x^2+y^2, x, y, 1] design matrix.
    """
    rows = np.array([[p.x**2 + p.y**2, p.x, p.y, 1.0] for p in points])
    _, _, vt = np.linalg.svd(rows)
    a, b, c, d = vt[-1]
    if abs(a) > 1e-14 and b * b + c * c - 4 * a * d <= 0:
        # fit collapses to a point circle; report as line through centroid
        a = 0.0
    if abs(a) <= 1e-14 and math.hypot(b, c) < 1e-14:
        raise ValueError("degenerate circle fit")
    return GeneralizedCircle.from_coefficients(a, b, c, d)


def are_cocircular(points, tol: float = EPS_RESID) -> bool:
    """True when one circle (or line) passes within ``tol`` of every point."""
    pts = list(points)
    if len(pts) < 4:
        raise TooFewPoints("cocircularity needs at least 4 points")
    try:
        circ = fit_generalized_circle(pts)
    except ValueError:
        return False
    return max(circ.distance(p) for p in pts) < tol


def are_collinear(points, tol: float = EPS_RESID) -> bool:
    """True when one line passes within ``tol`` of every point."""
    pts = list(points)
    if len(pts) <= 2:
        return True
    zs = as_complex(pts)
    centered = zs - zs.mean()
    # principal direction of the 2 x n real coordinate matrix
    coords = np.stack([centered.real, centered.imag])
    _, s, vt = np.linalg.svd(coords @ coords.T)
    direction = complex(vt[0, 0], vt[0, 1])
    offsets = (centered * direction.conjugate()).imag
    return float(np.max(np.abs(offsets))) < tol


def align_similarity(source, target, allow_mirror: bool = False) -> tuple[Similarity, float]:
    """Least-squares similarity mapping ``source`` onto ``target``.

    Returns the similarity and the rms of the remaining point distances.
    With ``allow_mirror`` both orientations are tried and the better fit
    wins.  Raises DegenerateSource when the source points all coincide.
    """
    src = as_complex(source)
    tgt = as_complex(target)
    if len(src) != len(tgt):
        raise ValueError("point tuples must have equal length")
    if len(src) < 2:
        raise ValueError("need at least 2 points to fix a similarity")

    def fit(zs: np.ndarray, mirrored: bool) -> tuple[Similarity, float]:
        zm, tm = zs.mean(), tgt.mean()
        denom = float(np.sum(np.abs(zs - zm) ** 2))
        if denom < 1e-30:
            raise DegenerateSource("all source points coincide")
        a = complex(np.sum((tgt - tm) * np.conj(zs - zm)) / denom)
        if abs(a) < 1e-30:
            # target collapses to a point; keep a tiny but valid scale
            a = 1e-15 + 0j
        b = tm - a * zm
        res = math.sqrt(float(np.mean(np.abs(a * zs + b - tgt) ** 2)))
        return Similarity(a, b, mirrored), res

    best = fit(src, False)
    if allow_mirror:
        mirrored = fit(np.conj(src), True)
        if mirrored[1] < best[1]:
            best = mirrored
    return best
