"""Degeneracy detection and the directed-angle ambiguity analysis.

Squared angles cannot tell a quadrilateral from its twin.  Directed
angles sometimes can: the quotient of corresponding directed angles is
+1 or -1, constant on each connected region cut out of the plane by the
four circles through three of the quadrilateral's vertices.  Measure
points in the region containing the diagonal intersection of a convex
quadrilateral give quotient +1 for every target, so there the twin stays
indistinguishable even with ray directions.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    Cocircular,
    CollinearTriple,
    OnExceptionalCurve,
    QuotientNotSign,
    ValidationFailed,
)
from .geometry import (
    GeneralizedCircle,
    PlanarPoint,
    are_cocircular,
    are_collinear,
    circle_through,
    collinearity,
)
from .measurement import Configuration, DirectedAngleMatrix, directed_angle, double_angle
from .profile import RANK_TOL
from .reconstruct import resect

# Flags matching the known ambiguous families.
FLAG_TARGETS_COCIRCULAR = "five-or-more-targets-cocircular-or-collinear"
FLAG_MEASURES_COCIRCULAR = "four-or-more-measures-cocircular-or-collinear"
FLAG_CYCLIC_CUBIC = "all-points-on-a-cyclic-cubic"

# Affine basis of real plane cubics through the two circular points at
# infinity: 1, x, y, x^2, xy, y^2, x(x^2+y^2), y(x^2+y^2).
_CUBIC_POWERS = ((0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2))


@dataclass(frozen=True)
class CyclicCubic:
    """Plane cubic through the two circular points at infinity.

    Stores the 10 homogeneous coefficients (lexicographic monomial order
    X0^a X1^b X2^c, a+b+c = 3, sorted by (a, b) descending) of a real
    cubic; vanishing at (0 : 1 : +-i) is built into the construction.
    """

    coefficients: np.ndarray
    underdetermined: bool = False

    def __post_init__(self):
        c = np.asarray(self.coefficients, dtype=float)
        if c.shape != (10,):
            raise ValueError("need 10 homogeneous coefficients")
        object.__setattr__(self, "coefficients", c)

    @classmethod
    def from_affine_basis(cls, weights, underdetermined: bool = False) -> "CyclicCubic":
        """Cubic from weights on (1, x, y, x^2, xy, y^2, x*s, y*s), s = x^2+y^2."""
        w = np.asarray(weights, dtype=float)
        if w.shape != (8,):
            raise ValueError("need 8 basis weights")
        # homogeneous monomials of degree 3 in (X0, X1, X2), lexicographic
        # by exponent of X0 then X1: 300,210,201,120,111,102,030,021,012,003
        c = np.zeros(10)
        c[0] = w[0]                 # X0^3
        c[1] = w[1]                 # X0^2 X1
        c[2] = w[2]                 # X0^2 X2
        c[3] = w[3]                 # X0 X1^2
        c[4] = w[4]                 # X0 X1 X2
        c[5] = w[5]                 # X0 X2^2
        c[6] = w[6]                 # X1^3      <- x * (x^2)
        c[7] = w[7]                 # X1^2 X2   <- y * (x^2)
        c[8] = w[6]                 # X1 X2^2   <- x * (y^2)
        c[9] = w[7]                 # X2^3      <- y * (y^2)
        n = np.linalg.norm(c)
        return cls(c / n, underdetermined)

    def evaluate(self, p: PlanarPoint) -> float:
        x, y = p.x, p.y
        mono = [1.0, x, y, x * x, x * y, y * y, x * x * x,
                x * x * y, x * y * y, y * y * y]
        return float(np.dot(self.coefficients, mono))

    def evaluate_homogeneous(self, coords) -> complex:
        x0, x1, x2 = coords
        mono = np.array(
            [x0**3, x0**2 * x1, x0**2 * x2, x0 * x1**2, x0 * x1 * x2,
             x0 * x2**2, x1**3, x1**2 * x2, x1 * x2**2, x2**3]
        )
        return complex(np.dot(self.coefficients, mono))


def _cubic_row(p: PlanarPoint) -> list[float]:
    x, y = p.x, p.y
    s = x * x + y * y
    return [1.0, x, y, x * x, x * y, y * y, x * s, y * s]


def fit_cyclic_cubic(points, tol: float = RANK_TOL) -> CyclicCubic | None:
    """A cyclic cubic through all points, or None when no such curve exists.

    The real cubics through both circular points form an 8-dimensional
    space; each point imposes one linear condition.  With 7 or fewer
    points a curve always exists and comes back flagged underdetermined.
    """
    pts = list(points)
    if not pts:
        raise ValueError("need at least one point")
    rows = np.array([_cubic_row(p) for p in pts])
    _, sv, vt = np.linalg.svd(rows)
    rank = int(np.sum(sv > tol * sv[0]))
    if rank >= 8:
        return None
    return CyclicCubic.from_affine_basis(vt[-1], underdetermined=len(pts) <= 7)


def degeneracy_flags(cfg, tol: float = 1e-7) -> frozenset:
    """Which of the known ambiguity-producing families the configuration sits in.

    Accepts a Configuration or a (targets, measures) pair.  Checks every
    5-subset of targets and 4-subset of measures for lying on one circle
    or line, and all points together for lying on a cyclic cubic (only
    meaningful once at least 8 points constrain the 8-dimensional space).
    """
    if isinstance(cfg, Configuration):
        targets, measures = cfg.targets, cfg.measures
    else:
        targets, measures = tuple(cfg[0]), tuple(cfg[1])
    flags = set()
    for sub in itertools.combinations(targets, 5):
        if are_cocircular(sub, tol=tol) or are_collinear(sub, tol=tol):
            flags.add(FLAG_TARGETS_COCIRCULAR)
            break
    for sub in itertools.combinations(measures, 4):
        if are_cocircular(sub, tol=tol) or are_collinear(sub, tol=tol):
            flags.add(FLAG_MEASURES_COCIRCULAR)
            break
    everything = tuple(targets) + tuple(measures)
    if len(everything) >= 8:
        cubic = fit_cyclic_cubic(everything)
        if cubic is not None and max(abs(cubic.evaluate(p)) for p in everything) < 1e-6:
            flags.add(FLAG_CYCLIC_CUBIC)
    return frozenset(flags)


@dataclass(frozen=True)
class FundamentalCircles:
    """The four circles through three of a quadrilateral's vertices.

    Circle i omits vertex i.  These are exactly the curves the twin map
    blows down, so they partition the plane into the regions on which the
    directed-angle sign is constant.
    """

    points: tuple[PlanarPoint, ...]
    circles: tuple[GeneralizedCircle, ...]

    def nearest_distance(self, q: PlanarPoint) -> float:
        return min(c.distance(q) for c in self.circles)


def fundamental_circles(quad) -> FundamentalCircles:
    """Fundamental circles of a nondegenerate, non-cocircular quadrilateral."""
    pts = tuple(quad)
    if len(pts) != 4:
        raise ValueError("need exactly 4 points")
    for tri in itertools.combinations(pts, 3):
        if collinearity(*tri) < 1e-9:
            raise CollinearTriple("three vertices are collinear")
    if are_cocircular(pts, tol=1e-9):
        raise Cocircular("cocircular vertices: the twin map is a plain similarity")
    circles = []
    for i in range(4):
        tri = [pts[j] for j in range(4) if j != i]
        circles.append(circle_through(*tri))
    return FundamentalCircles(pts, tuple(circles))


@dataclass(frozen=True)
class RegionSignature:
    """Inside/outside pattern against the four fundamental circles plus a
    coarse location label."""

    bits: tuple[bool, bool, bool, bool]
    label: str  # "inner" | "bounded" | "unbounded"


def is_convex(quad) -> bool:
    """True when the four points are in convex position (their hull has
    four vertices)."""
    pts = tuple(quad)
    if len(pts) != 4:
        raise ValueError("need exactly 4 points")

    def orient(a, b, c) -> float:
        return ((b.z - a.z) * np.conj(c.z - a.z)).imag

    def inside_triangle(p, a, b, c) -> bool:
        s = [orient(a, b, p), orient(b, c, p), orient(c, a, p)]
        return all(v >= 0 for v in s) or all(v <= 0 for v in s)

    return not any(
        inside_triangle(pts[i], *[pts[j] for j in range(4) if j != i]) for i in range(4)
    )


def convex_order(quad) -> tuple[int, int, int, int]:
    """Indices of the vertices in counterclockwise hull order."""
    pts = tuple(quad)
    center = sum(p.z for p in pts) / 4.0
    return tuple(sorted(range(4), key=lambda i: math.atan2((pts[i].z - center).imag,
                                                           (pts[i].z - center).real)))


def diagonal_intersection(quad) -> PlanarPoint:
    """Crossing point of the two diagonals of the convex hull ordering."""
    pts = tuple(quad)
    order = convex_order(pts)
    a, b, c, d = (pts[i].z for i in order)
    d1 = c - a
    d2 = d - b
    det = (d1 * np.conj(d2)).imag
    if abs(det) < 1e-14 * abs(d1) * abs(d2):
        raise CollinearTriple("diagonals do not cross transversally")
    s = ((b - a) * np.conj(d2)).imag / det
    return PlanarPoint.from_complex(a + s * d1)


def _raw_bits(q: PlanarPoint, fc: FundamentalCircles) -> tuple[bool, bool, bool, bool]:
    return tuple(bool(c.side(q) < 0) for c in fc.circles)


def region_signature(q: PlanarPoint, fc: FundamentalCircles,
                     tol: float = 1e-9) -> RegionSignature:
    """Locate a point in the partition cut out by the fundamental circles.

    Raises OnExceptionalCurve when the point is within ``tol`` of one of
    the circles, where the signature would be meaningless.
    """
    if fc.nearest_distance(q) < tol:
        raise OnExceptionalCurve("point lies on a fundamental circle")
    bits = _raw_bits(q, fc)
    if not any(bits):
        label = "unbounded"
    else:
        label = "bounded"
        if is_convex(fc.points):
            inner = _raw_bits(diagonal_intersection(fc.points), fc)
            if bits == inner:
                label = "inner"
    return RegionSignature(bits, label)


def region_census(fc: FundamentalCircles, grid: int = 64) -> set:
    """All signature patterns realized by the partition.

    Samples a bounding grid, small rings around each vertex (every region
    touches a vertex, since every boundary arc ends in one), offset points
    along each arc, and one far point for the unbounded region.
    """
    circles = [(c.center(), c.radius()) for c in fc.circles]
    scale = max(r for _, r in circles)

    def clean(z: complex) -> bool:
        p = PlanarPoint.from_complex(z)
        if fc.nearest_distance(p) < 1e-9 * scale:
            return False
        return all(abs(z - v.z) > 1e-12 for v in fc.points)

    found = set()

    def add(z: complex):
        if clean(z):
            found.add(_raw_bits(PlanarPoint.from_complex(z), fc))

    for v in fc.points:
        for radius in (1e-7, 1e-6, 1e-5, 1e-4, 1e-3, 1e-2):
            for angle in np.linspace(0.0, 2.0 * np.pi, 73)[:-1]:
                add(v.z + radius * scale * np.exp(1j * angle))
    for i, (center, radius) in enumerate(circles):
        on_it = [fc.points[j] for j in range(4) if j != i]
        angles = sorted(np.angle(p.z - center.z) for p in on_it)
        for k in range(3):
            a0 = angles[k]
            a1 = angles[(k + 1) % 3] + (2.0 * np.pi if k == 2 else 0.0)
            for frac in (0.05, 0.25, 0.5, 0.75, 0.95):
                phi = a0 + (a1 - a0) * frac
                for delta in (1e-7, 1e-5, 1e-3, 1e-2):
                    for sign in (1.0, -1.0):
                        add(center.z + radius * (1.0 + sign * delta) * np.exp(1j * phi))
    lo = min(min(c.x - r, c.y - r) for (c, r) in circles) - 0.4 * scale
    hi = max(max(c.x + r, c.y + r) for (c, r) in circles) + 0.4 * scale
    for x in np.linspace(lo, hi, grid):
        for y in np.linspace(lo, hi, grid):
            add(complex(x, y))
    add(complex(hi + 10.0 * scale, 0.0))
    return found


def unbounded_boundary_arcs(fc: FundamentalCircles) -> int:
    """Number of circle arcs bounding the unbounded region.

    Each circle is split into three arcs by the vertices on it; an arc
    borders the unbounded region when stepping slightly outward from its
    midpoint lands outside all four circles.
    """
    circles = [(c.center(), c.radius()) for c in fc.circles]
    scale = max(r for _, r in circles)
    count = 0
    for i, (center, radius) in enumerate(circles):
        on_it = [fc.points[j] for j in range(4) if j != i]
        angles = sorted(np.angle(p.z - center.z) for p in on_it)
        for k in range(3):
            a0 = angles[k]
            a1 = angles[(k + 1) % 3] + (2.0 * np.pi if k == 2 else 0.0)
            phi = (a0 + a1) / 2.0
            for delta in (1e-6, 1e-5, 1e-4, 1e-3):
                for sign in (1.0, -1.0):
                    z = center.z + radius * (1.0 + sign * delta) * np.exp(1j * phi)
                    p = PlanarPoint.from_complex(z)
                    if fc.nearest_distance(p) < 0.3 * delta * radius:
                        continue
                    if not any(_raw_bits(p, fc)):
                        count += 1
                        break
                else:
                    continue
                break
    return count


def twin_map(q: PlanarPoint, quad, twin_quad, tol: float = 1e-8,
             fc: FundamentalCircles | None = None) -> PlanarPoint:
    """Image of a measure point under the correspondence between a
    quadrilateral and its twin.

    Measures q against the quadrilateral and resects the squared angles
    against the twin's first three vertices; the fourth vertex is the
    consistency witness.  Undefined on the fundamental circles, which the
    map blows down.
    """
    pts = tuple(quad)
    tw = tuple(twin_quad)
    if fc is None:
        fc = fundamental_circles(pts)
    if fc.nearest_distance(q) < 1e-9:
        raise OnExceptionalCurve("measure point lies on a fundamental circle")
    d = [double_angle(q, pts[0], pts[i]) for i in (1, 2, 3)]
    image = resect(tw[0], tw[1], tw[2], d[0], d[1])
    witness = abs(double_angle(image, tw[0], tw[3]) - d[2])
    if witness > tol:
        raise ValidationFailed(
            f"fourth twin vertex deviates by {witness:.3e} (tol {tol:.1e})"
        )
    return image


def direction_sign(q: PlanarPoint, quad, twin_quad, i: int,
                   fc: FundamentalCircles | None = None) -> int:
    """Quotient of directed angles between a configuration and its twin,
    rounded to the sign it must be.

    The squared angles agree by construction, so the quotient of the
    directed angles toward target ``i`` (1-based over the non-reference
    vertices: 1, 2 or 3) is +1 or -1 up to numerical noise.
    """
    if i not in (1, 2, 3):
        raise ValueError("target index must be 1, 2 or 3")
    pts = tuple(quad)
    tw = tuple(twin_quad)
    image = twin_map(q, pts, tw, fc=fc)
    quotient = directed_angle(image, tw[0], tw[i]) / directed_angle(q, pts[0], pts[i])
    if abs(quotient - 1.0) <= 0.1:
        return 1
    if abs(quotient + 1.0) <= 0.1:
        return -1
    raise QuotientNotSign(f"directed-angle quotient {quotient:.6f} is not close to +-1")


def filter_by_direction(candidates, directed: DirectedAngleMatrix,
                        tol: float = 1e-6) -> list[Configuration]:
    """Candidates whose measure points reproduce every directed angle.

    A candidate that matches the squared angles has measure points that
    reproduce each directed entry either exactly or conjugated; it
    survives only if every entry matches exactly.  When all measure
    points lie in the inner region of a convex quadrilateral, both twin
    candidates survive.
    """
    kept = []
    for cfg in candidates:
        if cfg.t != directed.t or cfg.m != directed.m:
            continue
        worst = 0.0
        for j, q in enumerate(cfg.measures):
            for i in range(1, cfg.t):
                worst = max(
                    worst,
                    abs(directed_angle(q, cfg.targets[0], cfg.targets[i])
                        - directed.entries[j, i - 1]),
                )
            if worst > tol:
                break
        if worst <= tol:
            kept.append(cfg)
    return kept
