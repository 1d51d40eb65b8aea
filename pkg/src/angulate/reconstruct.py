"""Point identification from squared-angle data.

The solver follows the dimension count (m - 2)(t - 3) - 2: below zero the
problem is underdetermined, at zero there are generically two solutions
(t = 4, or m = 3), above zero the solution is generically unique.  Unique
cases are solved constructively through subset profiles and diagonal
measurements; the two-solution cases get their second configuration from
the twin quadrilateral, directly for t = 4 and through an inversion-based
duality for m = 3.  A damped least-squares enumerator over random restarts
serves as an independent oracle for the solution count.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    CollinearTriple,
    CriticalCircleWarning,
    DegenerateSubset,
    InconsistentAngles,
    NoSolutionFound,
    NonUniqueProfile,
    OnCriticalCircle,
    ParallelLines,
    TangentCircles,
    ValidationFailed,
)
from .geometry import (
    DoubleAngle,
    PlanarPoint,
    align_similarity,
    are_cocircular,
    circle_through,
    circumcenter,
    collinearity,
    ensure_unit,
)
from .measurement import (
    Configuration,
    DirectedAngleMatrix,
    DoubleAngleMatrix,
    canonical_configuration,
    double_angle,
    double_angle_matrix,
    matrix_mismatch,
)
from .profile import diagonal_measurement, interpolate_subset_profile

DEFAULT_RESTARTS = 64
CONVERGENCE_TOL = 1e-10
CLUSTER_TOL = 1e-4


class SolutionKind(enum.Enum):
    UNIQUE = "unique"
    TWIN_PAIR = "twin-pair"
    INFINITE = "infinite"
    DEGENERATE_AMBIGUOUS = "degenerate-ambiguous"


@dataclass(frozen=True)
class SolutionSet:
    """Tagged reconstruction outcome.

    Solutions are canonicalized (target 0 at the origin, target 1 at
    (1, 0)); for a twin pair the first solution has positive orientation
    of its first three targets.  Degenerate kinds carry their reasons and
    may still include representative solutions.
    """

    kind: SolutionKind
    solutions: tuple[Configuration, ...]
    reasons: tuple[str, ...] = ()
    residuals: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind is SolutionKind.UNIQUE and len(self.solutions) != 1:
            raise ValueError("unique outcome must carry exactly one solution")
        if self.kind is SolutionKind.TWIN_PAIR and len(self.solutions) != 2:
            raise ValueError("twin-pair outcome must carry exactly two solutions")
        if self.kind in (SolutionKind.INFINITE, SolutionKind.DEGENERATE_AMBIGUOUS):
            if not self.reasons:
                raise ValueError("degenerate outcomes must carry reasons")


@dataclass(frozen=True)
class ReconstructionReport:
    """Bookkeeping for one solve call."""

    t: int
    m: int
    excess_dof: int           # (m - 2)(t - 3) - 2
    branch: str
    residuals: dict = field(default_factory=dict)
    notes: tuple[str, ...] = ()


def excess_dof(t: int, m: int) -> int:
    return (m - 2) * (t - 3) - 2


# ---------------------------------------------------------------------------
# resection and forward intersection
# ---------------------------------------------------------------------------

def _angle_circle(p1: complex, p2: complex, d: DoubleAngle) -> np.ndarray:
    """Coefficients (A, B, C, D) of the locus seeing p1, p2 under a fixed
    angle mod pi; a circle through both points (a line when the angle is 0)."""
    theta = np.angle(d) / 2.0
    e = np.exp(-1j * theta)
    beta = np.conj(e) * np.conj(p2) - e * np.conj(p1)
    ib = 1j * beta
    return np.array(
        [
            2.0 * math.sin(theta),
            2.0 * ib.real,
            -2.0 * ib.imag,
            -2.0 * (e * np.conj(p1) * p2).imag,
        ]
    )


def _coincident_circles(c1: np.ndarray, c2: np.ndarray, tol: float) -> bool:
    n1, n2 = np.linalg.norm(c1), np.linalg.norm(c2)
    if n1 == 0 or n2 == 0:
        return True
    u1, u2 = c1 / n1, c2 / n2
    return min(np.max(np.abs(u1 - u2)), np.max(np.abs(u1 + u2))) < tol


def resect(p1: PlanarPoint, p2: PlanarPoint, p3: PlanarPoint,
           d12: DoubleAngle, d13: DoubleAngle, tol: float = 1e-9) -> PlanarPoint:
    """Measure point from three known targets and two squared angles.

    Each squared angle pins the measure point to a circle through the
    reference target and one other; the two circles meet at the reference
    target and at the sought point.  Raises OnCriticalCircle when the two
    circles coincide (the measure point sat on the circle through all
    three targets, where resection is not injective) and TangentCircles
    when they meet only at the reference target.
    """
    d12 = ensure_unit(d12, tol=1e-6)
    d13 = ensure_unit(d13, tol=1e-6)
    z1 = p1.z
    c12 = _angle_circle(z1, p2.z, d12)
    c13 = _angle_circle(z1, p3.z, d13)
    if _coincident_circles(c12, c13, 1e-9):
        raise OnCriticalCircle("angle circles coincide: point lies on the critical circle")
    # radical line of the two circles, through both intersection points
    line = c13[0] * c12 - c12[0] * c13
    nrm = math.hypot(line[1], line[2])
    scale = max(1.0, abs(z1), abs(p2.z), abs(p3.z))
    if nrm < 1e-13 * scale:
        raise TangentCircles("no radical line: circles do not meet twice")
    direction = complex(-line[2], line[1]) / nrm
    circle = c12 if abs(c12[0]) >= abs(c13[0]) else c13
    if abs(circle[0]) < 1e-13:
        # both loci are lines; they cross only at the reference target
        raise TangentCircles("both angle circles degenerate to lines through the target")
    # parameterize q(s) = z1 + s * direction on the radical line; s = 0 is
    # the reference target, the other root follows from the root sum
    b = (
        2.0 * circle[0] * (z1.real * direction.real + z1.imag * direction.imag)
        + circle[1] * direction.real
        + circle[2] * direction.imag
    )
    s2 = -b / circle[0]
    if abs(s2) < tol * scale:
        raise TangentCircles("angle circles are tangent at the reference target")
    q = PlanarPoint.from_complex(z1 + s2 * direction)
    critical = circle_through(p1, p2, p3)
    if critical.distance(q) < 1e-7 * scale:
        warnings.warn(
            "resection result lies close to the critical circle",
            CriticalCircleWarning,
            stacklevel=2,
        )
    return q


def forward_intersect(q1: PlanarPoint, q2: PlanarPoint, p1: PlanarPoint,
                      d1: DoubleAngle, d2: DoubleAngle,
                      tol: float = 1e-12) -> PlanarPoint:
    """Target from two measure points and the squared angles against the
    reference target.

    A squared angle fixes the sight line through each measure point (rays
    are not needed, lines suffice); the target is where the lines cross.
    """
    dir1 = (p1.z - q1.z) * np.sqrt(complex(ensure_unit(d1, tol=1e-6)))
    dir2 = (p1.z - q2.z) * np.sqrt(complex(ensure_unit(d2, tol=1e-6)))
    det = (dir1 * np.conj(dir2)).imag
    if abs(det) <= tol * abs(dir1) * abs(dir2):
        raise ParallelLines("sight lines are parallel")
    rhs = q2.z - q1.z
    s = (rhs * np.conj(dir2)).imag / det
    return PlanarPoint.from_complex(q1.z + s * dir1)


# ---------------------------------------------------------------------------
# constructive identification for t >= 5
# ---------------------------------------------------------------------------

def _subset_profile_quadric(matrix: DoubleAngleMatrix, subset):
    try:
        return interpolate_subset_profile(matrix, subset).unique()
    except NonUniqueProfile as exc:
        raise DegenerateSubset(
            f"profile of target subset {subset} has dimension {exc.dimension}"
        ) from exc


def angle_at_target(matrix: DoubleAngleMatrix, a: int, b: int, e: int) -> DoubleAngle:
    """Squared angle at target e between targets a and b, recovered from
    the matrix alone.

    Uses the three diagonal measurements of the subsets (a,b,c,d),
    (a,b,e,d) and (a,b,c,e): the angle at e equals the sum of the two
    angles seen at the diagonal points involving e minus the angle at the
    diagonal point of (a,b,c,d), an identity that in squared form becomes
    a product quotient.
    """
    rest = [k for k in range(matrix.t) if k not in (a, b, e)]
    if len(rest) < 2:
        raise ValueError("need at least 5 targets")
    c, d = rest[0], rest[1]
    alpha = diagonal_measurement(_subset_profile_quadric(matrix, (a, b, c, d)))[0]
    beta = diagonal_measurement(_subset_profile_quadric(matrix, (a, b, e, d)))[0]
    gamma = diagonal_measurement(_subset_profile_quadric(matrix, (a, b, c, e)))[0]
    value = beta * gamma / alpha
    return value / abs(value)


def identify_targets(matrix: DoubleAngleMatrix, tol: float = 1e-6) -> tuple[PlanarPoint, ...]:
    """Targets from the matrix, for t >= 5 and m >= 4, up to similarity.

    Recovers the angles at target 0 and target 1 subtended toward every
    other target via diagonal measurements of subset profiles, pins
    target 0 to the origin and target 1 to (1, 0), and intersects the two
    sight lines for each remaining target.  A final resection of every
    measure point cross-validates the result against the input matrix.
    """
    t, m = matrix.t, matrix.m
    if t < 5:
        raise ValueError("constructive identification needs at least 5 targets")
    if m < 4:
        raise ValueError("constructive identification needs at least 4 measures")
    p0 = PlanarPoint(0.0, 0.0)
    p1 = PlanarPoint(1.0, 0.0)
    anchor = PlanarPoint(0.5, 0.0)  # any point on the base line works mod pi
    targets = [p0, p1]
    for k in range(2, t):
        at0 = angle_at_target(matrix, 1, k, 0)   # at target 0, between targets 1 and k
        at1 = angle_at_target(matrix, 0, k, 1)   # at target 1, between targets 0 and k
        targets.append(forward_intersect(p0, p1, anchor, at0, at1))
    residual = _cross_validate(matrix, tuple(targets))
    if residual > tol:
        raise InconsistentAngles(
            f"re-measured angles deviate by {residual:.3e} (tol {tol:.1e})"
        )
    return tuple(targets)


def _cross_validate(matrix: DoubleAngleMatrix, targets) -> float:
    worst = 0.0
    for j in range(matrix.m):
        q = resect(targets[0], targets[1], targets[2],
                   matrix.entries[j, 0], matrix.entries[j, 1])
        for i in range(1, matrix.t):
            worst = max(
                worst,
                abs(double_angle(q, targets[0], targets[i]) - matrix.entries[j, i - 1]),
            )
    return worst


def resect_measures(matrix: DoubleAngleMatrix, targets) -> tuple[PlanarPoint, ...]:
    """All measure points by resection against the first three targets."""
    return tuple(
        resect(targets[0], targets[1], targets[2],
               matrix.entries[j, 0], matrix.entries[j, 1])
        for j in range(matrix.m)
    )


# ---------------------------------------------------------------------------
# twin quadrilateral and the two-solution branches
# ---------------------------------------------------------------------------

def twin_quadrilateral(points, tol: float = 1e-9) -> tuple[PlanarPoint, ...]:
    """The second quadrilateral indistinguishable from this one by
    squared-angle measurements.

    Vertex i of the twin is the circumcenter of the triangle omitting
    vertex i, reflected across the x axis.  Cocircular vertices are their
    own twin and are returned unchanged.  Raises CollinearTriple when
    three vertices are collinear.
    """
    pts = tuple(points)
    if len(pts) != 4:
        raise ValueError("twin construction needs exactly 4 points")
    from itertools import combinations

    for tri in combinations(pts, 3):
        if collinearity(*tri) < tol:
            raise CollinearTriple("three of the four vertices are collinear")
    if are_cocircular(pts, tol=tol):
        return pts
    out = []
    for i in range(4):
        tri = [pts[j] for j in range(4) if j != i]
        center = circumcenter(*tri)
        out.append(PlanarPoint(center.x, -center.y))
    return tuple(out)


def _orientation(points) -> float:
    a, b, c = points[0].z, points[1].z, points[2].z
    return ((b - a) * np.conj(c - a)).imag


def _order_twin_pair(first: Configuration, second: Configuration):
    """Positive orientation of the first three targets goes first; ties
    break lexicographically on coordinates."""
    key = lambda cfg: (
        -math.copysign(1.0, _orientation(cfg.targets)),
        tuple((p.x, p.y) for p in cfg.all_points()),
    )
    return tuple(sorted((first, second), key=key))


def identify_quadrilateral(matrix: DoubleAngleMatrix,
                           restarts: int = DEFAULT_RESTARTS,
                           seed: int = 0,
                           tol: float = 1e-6) -> SolutionSet:
    """Both solutions for exactly 4 targets and at least 4 measures.

    One solution comes from the numeric enumerator; the other is its twin
    quadrilateral with measures re-resected.  Cocircular targets are
    self-twin, collapsing the pair to a unique solution.
    """
    if matrix.t != 4:
        raise ValueError("this branch handles exactly 4 targets")
    if matrix.m < 4:
        raise ValueError("need at least 4 measures")
    found = enumerate_numeric(matrix, restarts=restarts, seed=seed, stop_after=1)
    if not found:
        raise NoSolutionFound("numeric stage failed on every restart")
    first = found[0]
    res_first = matrix_mismatch(first, matrix)
    twin_targets = twin_quadrilateral(first.targets)
    if are_cocircular(first.targets, tol=1e-7):
        return SolutionSet(
            SolutionKind.UNIQUE,
            (first,),
            residuals={"matrix-mismatch": res_first},
        )
    twin_measures = resect_measures(matrix, twin_targets)
    second = canonical_configuration(Configuration(twin_targets, twin_measures))
    res_second = matrix_mismatch(second, matrix)
    if res_second > tol:
        raise ValidationFailed(
            f"twin solution misses the matrix by {res_second:.3e} (tol {tol:.1e})"
        )
    ordered = _order_twin_pair(first, second)
    return SolutionSet(
        SolutionKind.TWIN_PAIR,
        ordered,
        residuals={"matrix-mismatch": max(res_first, res_second)},
    )


def _invert(z: complex, center: complex) -> complex:
    return center + 1.0 / (z - center)


def dual_second_solution(sol: Configuration, tol: float = 1e-6) -> Configuration:
    """Second solution for exactly 3 measure points.

    Inverting the plane at the reference target swaps the roles of
    measure and target points while transposing the squared-angle matrix,
    so the three measure points and the reference target dualize to a
    quadrilateral.  Its twin, pulled back through the inversion at the
    twin's own reference vertex, yields the other configuration with the
    same measurements; the third measure row is the consistency witness.
    """
    if sol.m != 3:
        raise ValueError("duality construction applies to exactly 3 measures")
    if sol.t < 5:
        raise ValueError("duality construction needs at least 5 targets")
    matrix = double_angle_matrix(sol)
    o = sol.targets[0].z
    dual_quad = (sol.targets[0],) + tuple(
        PlanarPoint.from_complex(_invert(q.z, o)) for q in sol.measures
    )
    twin = twin_quadrilateral(dual_quad)
    o2 = twin[0].z
    new_measures = tuple(
        PlanarPoint.from_complex(_invert(v.z, o2)) for v in twin[1:]
    )
    new_targets = [twin[0]]
    for i in range(1, sol.t):
        new_targets.append(
            forward_intersect(new_measures[0], new_measures[1], twin[0],
                              matrix.entries[0, i - 1], matrix.entries[1, i - 1])
        )
    candidate = Configuration(tuple(new_targets), new_measures)
    witness = max(
        abs(double_angle(new_measures[2], new_targets[0], new_targets[i])
            - matrix.entries[2, i - 1])
        for i in range(1, sol.t)
    )
    if witness > tol:
        raise ValidationFailed(
            f"third measure row deviates by {witness:.3e} (tol {tol:.1e})"
        )
    return canonical_configuration(candidate)


# ---------------------------------------------------------------------------
# numeric enumeration oracle
# ---------------------------------------------------------------------------

def _unpack(x: np.ndarray, t: int, m: int) -> tuple[np.ndarray, np.ndarray]:
    ps = np.concatenate(([0.0 + 0.0j, 1.0 + 0.0j],
                         x[: 2 * (t - 2)][0::2] + 1j * x[: 2 * (t - 2)][1::2]))
    qs = x[2 * (t - 2):][0::2] + 1j * x[2 * (t - 2):][1::2]
    return ps, qs


def _residual_jacobian(x: np.ndarray, entries: np.ndarray, t: int, m: int,
                       want_jacobian: bool = True):
    """Entrywise unit-complex residual and its exact Jacobian.

    Residual entry (j, i): model squared angle minus matrix entry, where
    the model value is u / conj(u) for u = conj(q_j - p_0)(q_j - p_i);
    no normalization or argument extraction is ever needed.
    """
    ps, qs = _unpack(x, t, m)
    qp0 = np.conj(qs - ps[0])
    qpi = qs[:, None] - ps[None, 1:]
    u = qp0[:, None] * qpi
    if np.any(np.abs(u) < 1e-13):
        return None, None
    f = u / np.conj(u)
    e = f - entries
    r = np.empty(2 * m * (t - 1))
    r[0::2] = e.real.ravel()
    r[1::2] = e.imag.ravel()
    if not want_jacobian:
        return r, None
    n = 2 * (t - 2) + 2 * m
    jc = np.zeros((m * (t - 1), n), dtype=complex)
    cu = np.conj(u)
    for k in range(2, t):
        col = k - 1
        rows = np.arange(m) * (t - 1) + col
        dux = -qp0
        duy = -1j * qp0
        jc[rows, 2 * (k - 2)] = (dux - f[:, col] * np.conj(dux)) / cu[:, col]
        jc[rows, 2 * (k - 2) + 1] = (duy - f[:, col] * np.conj(duy)) / cu[:, col]
    off = 2 * (t - 2)
    for j in range(m):
        dux = qpi[j] + qp0[j]
        duy = 1j * (qp0[j] - qpi[j])
        rows = j * (t - 1) + np.arange(t - 1)
        jc[rows, off + 2 * j] = (dux - f[j] * np.conj(dux)) / cu[j]
        jc[rows, off + 2 * j + 1] = (duy - f[j] * np.conj(duy)) / cu[j]
    jac = np.empty((2 * m * (t - 1), n))
    jac[0::2] = jc.real
    jac[1::2] = jc.imag
    return r, jac


def _damped_least_squares(entries: np.ndarray, t: int, m: int, x0: np.ndarray,
                          max_iter: int = 120) -> tuple[np.ndarray | None, float]:
    """Damped least squares with multiplicative 10x damping updates."""
    x = x0.copy()
    r, jac = _residual_jacobian(x, entries, t, m)
    if r is None:
        return None, float("inf")
    cost = float(r @ r)
    lam = 1e-2
    n = len(x)
    eye = np.eye(n)
    for _ in range(max_iter):
        g = jac.T @ r
        a = jac.T @ jac
        stepped = False
        for _ in range(25):
            try:
                dx = np.linalg.solve(a + lam * eye, -g)
            except np.linalg.LinAlgError:
                lam *= 10.0
                continue
            rn, jn = _residual_jacobian(x + dx, entries, t, m)
            if rn is not None and float(rn @ rn) < cost:
                x = x + dx
                r, jac = rn, jn
                new_cost = float(rn @ rn)
                improvement = cost - new_cost
                cost = new_cost
                lam = max(lam / 10.0, 1e-14)
                stepped = True
                if improvement < 1e-18 * max(cost, 1e-30) and cost > 1e-24:
                    stepped = False  # stalled at a local minimum
                break
            lam *= 10.0
            if lam > 1e15:
                break
        if not stepped or cost < 1e-28:
            break
    return x, float(np.abs(r).max())


_HOP_AMPLITUDES = (0.5, 0.35, 0.2, 0.1, 0.05, 0.02)


def _initial_guess(entries: np.ndarray, t: int, m: int, rng: np.random.Generator,
                   mode: int) -> np.ndarray:
    n = 2 * (t - 2) + 2 * m
    if mode == 1:
        return rng.uniform(-1.5, 2.0, n)
    scale = 1.0 if mode == 0 else 0.35
    free = 0.5 + scale * (rng.normal(size=t - 2) + 1j * rng.normal(size=t - 2))
    ps = [PlanarPoint(0.0, 0.0), PlanarPoint(1.0, 0.0)] + [
        PlanarPoint.from_complex(z) for z in free
    ]
    qs = []
    for j in range(m):
        try:
            q = resect(ps[0], ps[1], ps[2], entries[j, 0], entries[j, 1]).z
            if not np.isfinite(q) or abs(q) > 50:
                raise ValueError
        except Exception:
            q = complex(rng.uniform(-1.5, 2.0), rng.uniform(-1.5, 2.0))
        qs.append(q)
    pts = np.concatenate([free, np.array(qs)])
    x0 = np.empty(n)
    x0[0::2] = pts.real
    x0[1::2] = pts.imag
    return x0


def _single_restart(entries: np.ndarray, t: int, m: int, seed: int, k: int,
                    converge_tol: float) -> tuple[np.ndarray | None, float]:
    rng = np.random.default_rng([seed, k])
    x, res = _damped_least_squares(entries, t, m, _initial_guess(entries, t, m, rng, k % 3))
    for amplitude in _HOP_AMPLITUDES:
        if res < converge_tol or x is None:
            break
        x2, res2 = _damped_least_squares(entries, t, m, x + rng.normal(0.0, amplitude, len(x)))
        if res2 < res:
            x, res = x2, res2
    return x, res


def enumerate_numeric(matrix: DoubleAngleMatrix,
                      restarts: int = DEFAULT_RESTARTS,
                      seed: int = 0,
                      stop_after: int | None = None,
                      converge_tol: float = CONVERGENCE_TOL,
                      cluster_tol: float = CLUSTER_TOL) -> list[Configuration]:
    """All distinct configurations reproducing the matrix, found numerically.

    Damped least squares on the entrywise residual from seeded random
    starts; converged solutions (max entry deviation below
    ``converge_tol``) are clustered in the canonical frame, where two
    configurations are similar exactly when their coordinates agree.
    Cluster representatives come back ordered by residual, then by
    coordinates, so a fixed seed gives a fixed answer regardless of how
    the restarts are scheduled.
    """
    t, m = matrix.t, matrix.m
    if excess_dof(t, m) < 0:
        raise ValueError("underdetermined shape: nothing to enumerate")
    entries = matrix.entries
    converged: list[tuple[float, np.ndarray]] = []
    clusters: list[np.ndarray] = []
    for k in range(restarts):
        x, res = _single_restart(entries, t, m, seed, k, converge_tol)
        if x is None or res >= converge_tol:
            continue
        converged.append((res, x))
        if stop_after is not None:
            fresh = all(np.abs(c - x).max() >= cluster_tol for c in clusters)
            if fresh:
                clusters.append(x)
                if len(clusters) >= stop_after:
                    break
    reps: list[np.ndarray] = []
    for _, x in sorted(converged, key=lambda item: (item[0], tuple(item[1]))):
        if all(np.abs(rep - x).max() >= cluster_tol for rep in reps):
            reps.append(x)
    out = []
    for x in reps[: stop_after if stop_after is not None else len(reps)]:
        ps, qs = _unpack(x, t, m)
        out.append(
            Configuration(
                tuple(PlanarPoint.from_complex(z) for z in ps),
                tuple(PlanarPoint.from_complex(z) for z in qs),
            )
        )
    return out


# ---------------------------------------------------------------------------
# top-level solver
# ---------------------------------------------------------------------------

def _degeneracy_reasons(candidates) -> tuple[str, ...]:
    from .ambiguity import degeneracy_flags

    reasons: list[str] = []
    for cfg in candidates:
        for flag in sorted(degeneracy_flags(cfg)):
            if flag not in reasons:
                reasons.append(flag)
    return tuple(reasons)


def solve(matrix: DoubleAngleMatrix,
          directed: DirectedAngleMatrix | None = None,
          restarts: int = DEFAULT_RESTARTS,
          seed: int = 0,
          tol: float = 1e-6) -> tuple[SolutionSet, ReconstructionReport]:
    """Full case analysis of the identification problem.

    Branches on the shape (t, m): underdetermined shapes are reported as
    infinite; shapes with a positive excess degree count are solved
    constructively and uniquely; the two boundary shapes produce twin
    pairs.  Interpolation degeneracies and the known ambiguous families
    (five cocircular or collinear targets, four cocircular or collinear
    measures, all points on a cyclic cubic) are detected and reported
    instead of solutions.  A directed matrix, when given, filters a twin
    pair down to the candidates that also reproduce ray directions.
    """
    from .ambiguity import degeneracy_flags, filter_by_direction
    from .profile import interpolate_coprofile, interpolate_subset_profile

    t, m = matrix.t, matrix.m
    dof = excess_dof(t, m)
    notes: list[str] = []

    def report(branch: str, residuals: dict | None = None) -> ReconstructionReport:
        return ReconstructionReport(t, m, dof, branch, residuals or {}, tuple(notes))

    if dof < 0:
        outcome = SolutionSet(
            SolutionKind.INFINITE,
            (),
            reasons=(f"underdetermined shape: (m-2)(t-3)-2 = {dof} < 0",),
        )
        return outcome, report("parameter-count")

    def degenerate(reasons, sols=(), branch="degeneracy") -> tuple[SolutionSet, ReconstructionReport]:
        outcome = SolutionSet(
            SolutionKind.DEGENERATE_AMBIGUOUS, tuple(sols), reasons=tuple(reasons)
        )
        return outcome, report(branch)

    if t == 4 and m >= 4:
        dim = interpolate_subset_profile(matrix, (0, 1, 2, 3)).dimension
        if dim != 1:
            reasons = [f"profile interpolation dimension {dim}"]
            sols = enumerate_numeric(matrix, restarts=min(restarts, 16), seed=seed, stop_after=1)
            reasons.extend(r for r in _degeneracy_reasons(sols) if r not in reasons)
            return degenerate(reasons, sols, branch="quadrilateral-degenerate")
        outcome = identify_quadrilateral(matrix, restarts=restarts, seed=seed, tol=tol)
        flags = _degeneracy_reasons(outcome.solutions)
        if flags:
            return degenerate(flags, outcome.solutions, branch="quadrilateral-flagged")
        branch = "quadrilateral-twin"
    elif m == 3:
        dim = interpolate_coprofile(matrix).dimension
        if dim != 1:
            reasons = [f"co-profile interpolation dimension {dim}"]
            sols = enumerate_numeric(matrix, restarts=min(restarts, 16), seed=seed, stop_after=1)
            reasons.extend(r for r in _degeneracy_reasons(sols) if r not in reasons)
            return degenerate(reasons, sols, branch="dual-degenerate")
        found = enumerate_numeric(matrix, restarts=restarts, seed=seed, stop_after=1)
        if not found:
            raise NoSolutionFound("numeric stage failed on every restart")
        first = found[0]
        try:
            second = dual_second_solution(first, tol=tol)
        except (CollinearTriple, ValidationFailed) as exc:
            return degenerate(
                [f"dual construction failed: {exc}"] + list(_degeneracy_reasons([first])),
                [first],
                branch="dual-degenerate",
            )
        res = max(matrix_mismatch(first, matrix), matrix_mismatch(second, matrix))
        if align_similarity(first.all_points(), second.all_points())[1] < 1e-7:
            outcome = SolutionSet(SolutionKind.UNIQUE, (first,), residuals={"matrix-mismatch": res})
            notes.append("dual twin coincides with the first solution")
        else:
            outcome = SolutionSet(
                SolutionKind.TWIN_PAIR,
                _order_twin_pair(first, second),
                residuals={"matrix-mismatch": res},
            )
        flags = _degeneracy_reasons(outcome.solutions)
        if flags:
            return degenerate(flags, outcome.solutions, branch="dual-flagged")
        branch = "dual-twin"
    else:
        # t >= 5 and m >= 4: constructive unique branch
        try:
            targets = identify_targets(matrix, tol=tol)
        except (DegenerateSubset, InconsistentAngles) as exc:
            reasons = [str(exc)]
            sols = enumerate_numeric(matrix, restarts=min(restarts, 16), seed=seed, stop_after=1)
            reasons.extend(r for r in _degeneracy_reasons(sols) if r not in reasons)
            return degenerate(reasons, sols, branch="constructive-degenerate")
        measures = resect_measures(matrix, targets)
        cfg = canonical_configuration(Configuration(targets, measures))
        res = matrix_mismatch(cfg, matrix)
        outcome = SolutionSet(SolutionKind.UNIQUE, (cfg,), residuals={"matrix-mismatch": res})
        flags = _degeneracy_reasons([cfg])
        if flags:
            return degenerate(flags, [cfg], branch="constructive-flagged")
        branch = "constructive-unique"

    if directed is not None and outcome.kind is SolutionKind.TWIN_PAIR:
        kept = filter_by_direction(list(outcome.solutions), directed, tol=1e-6)
        notes.append(f"direction filter kept {len(kept)} of {len(outcome.solutions)}")
        if len(kept) == 1:
            outcome = SolutionSet(SolutionKind.UNIQUE, tuple(kept), residuals=outcome.residuals)
        elif len(kept) == 2:
            outcome = SolutionSet(SolutionKind.TWIN_PAIR, tuple(kept), residuals=outcome.residuals)
        # zero survivors means inconsistent directed data; keep the pair and the note
    return outcome, report(branch, dict(outcome.residuals))
