"""Quadric interpolation of measurement surfaces.

The closure of all possible squared-angle measurements of a 4-target
tuple is a quadric surface in P^3; the analogous surface for 3 measure
points and one fixed target (the co-profile) is again a quadric in P^3.
Both pass through every coordinate point of the ambient space and through
the all-ones point, which is the image of the point at infinity.  This
module interpolates those quadrics from matrix data by nullspace
computation and extracts the special "diagonal" measurements used by
point identification.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NonUniqueProfile, NonUnitChart, TangentLine
from .measurement import (
    DoubleAngleMatrix,
    ProjectivePoint,
    coprofile_point_from_column,
    profile_point_from_row,
)

# Rank decisions: singular values below RANK_TOL * sigma_max count as zero.
RANK_TOL = 1e-8

# Monomial order for quadratic forms in 4 variables: lexicographic on the
# index pairs (i, j), i <= j.  Serialized coefficient vectors use this order.
MONOMIAL_PAIRS: tuple[tuple[int, int], ...] = tuple(
    (i, j) for i in range(4) for j in range(i, 4)
)

# The three ways to split a 4-tuple into two diagonals, named by the
# coordinate positions that get equated in the chart.
DIAGONAL_PAIRINGS = ("02|13", "01|23", "03|12")


@dataclass(frozen=True)
class Quadric:
    """Quadratic form on P^3 as a symmetric 4x4 complex matrix.

    Normalized to unit Frobenius norm with the largest-modulus entry
    rotated to the positive real axis, so equal surfaces get equal
    matrices up to the sign conventions of the SVD.
    """

    matrix: np.ndarray

    def __post_init__(self):
        q = np.asarray(self.matrix, dtype=complex)
        if q.shape != (4, 4):
            raise ValueError("quadric matrix must be 4x4")
        if np.max(np.abs(q - q.T)) > 1e-12:
            raise ValueError("quadric matrix must be symmetric")
        object.__setattr__(self, "matrix", q)

    @classmethod
    def from_coefficients(cls, coeffs) -> "Quadric":
        """Build from the 10 monomial coefficients in MONOMIAL_PAIRS order."""
        c = np.asarray(coeffs, dtype=complex)
        if c.shape != (10,):
            raise ValueError("need 10 coefficients")
        q = np.zeros((4, 4), dtype=complex)
        for k, (i, j) in enumerate(MONOMIAL_PAIRS):
            if i == j:
                q[i, i] = c[k]
            else:
                q[i, j] += c[k] / 2
                q[j, i] += c[k] / 2
        return cls(_normalize(q))

    def coefficients(self) -> np.ndarray:
        c = np.empty(10, dtype=complex)
        for k, (i, j) in enumerate(MONOMIAL_PAIRS):
            c[k] = self.matrix[i, i] if i == j else 2 * self.matrix[i, j]
        return c

    def evaluate(self, point: ProjectivePoint) -> complex:
        v = point.coords / np.linalg.norm(point.coords)
        return complex(v @ self.matrix @ v)


def _normalize(q: np.ndarray) -> np.ndarray:
    flat = q.ravel()
    k = int(np.argmax(np.abs(flat)))
    phase = flat[k] / abs(flat[k])
    q = q / phase
    return q / np.linalg.norm(q)


@dataclass(frozen=True)
class InterpolationResult:
    """Nullspace of the interpolation conditions.

    ``dimension`` is the linear dimension of the space of quadratic forms
    vanishing at every input point; 1 means the surface is unique.
    ``conditioning`` is the ratio of the smallest retained to the largest
    discarded singular value (the safety margin of the rank decision).
    """

    basis: tuple[Quadric, ...]
    dimension: int
    conditioning: float

    def unique(self) -> Quadric:
        if self.dimension != 1:
            raise NonUniqueProfile(self.dimension)
        return self.basis[0]


def fixed_profile_points(dim: int) -> list[ProjectivePoint]:
    """The dim+2 points every measurement surface in P^dim contains:
    all coordinate points plus the all-ones point (image of infinity)."""
    if dim < 2:
        raise ValueError("ambient dimension must be at least 2")
    eye = np.eye(dim + 1, dtype=complex)
    pts = [ProjectivePoint(eye[k]) for k in range(dim + 1)]
    pts.append(ProjectivePoint(np.ones(dim + 1, dtype=complex)))
    return pts


def interpolate_quadric(points, rank_tol: float = RANK_TOL) -> InterpolationResult:
    """Span of quadratic forms on P^3 vanishing at all given points.

    Each point contributes one linear condition on the 10-dimensional
    space of forms; the returned basis spans the numerical nullspace.
    """
    pts = list(points)
    if not pts:
        raise ValueError("need at least one point")
    rows = []
    for p in pts:
        v = p.coords / np.linalg.norm(p.coords)
        if v.shape[0] != 4:
            raise ValueError("interpolation is implemented for P^3 only")
        rows.append([v[i] * v[j] for (i, j) in MONOMIAL_PAIRS])
    a = np.array(rows, dtype=complex)
    _, sv, vh = np.linalg.svd(a)
    cutoff = rank_tol * sv[0]
    rank = int(np.sum(sv > cutoff))
    dimension = 10 - rank
    if rank == 0:
        conditioning = 0.0
    elif rank >= len(sv):
        conditioning = float("inf")
    else:
        conditioning = float(sv[rank - 1] / sv[rank]) if sv[rank] > 0 else float("inf")
    basis = tuple(Quadric.from_coefficients(np.conj(vh[r])) for r in range(rank, 10))
    return InterpolationResult(basis, dimension, conditioning)


def _matrix_value(matrix: DoubleAngleMatrix, row: int, target: int) -> complex:
    """Entry for a target index, with the reference target reading 1."""
    if target == 0:
        return 1.0 + 0.0j
    return matrix.entries[row, target - 1]


def subset_row_points(matrix: DoubleAngleMatrix, subset) -> list[ProjectivePoint]:
    """Measurement points of an ordered 4-subset of targets, re-referenced
    through the stored angles by the addition rule for angles at a vertex."""
    sub = tuple(subset)
    if len(sub) != 4 or len(set(sub)) != 4:
        raise ValueError("subset must be 4 distinct target indices")
    if any(i < 0 or i >= matrix.t for i in sub):
        raise ValueError("target index out of range")
    return [
        ProjectivePoint(np.array([_matrix_value(matrix, j, i) for i in sub]))
        for j in range(matrix.m)
    ]


def interpolate_subset_profile(matrix: DoubleAngleMatrix, subset,
                               rank_tol: float = RANK_TOL) -> InterpolationResult:
    """Interpolation result for the profile of an ordered 4-subset."""
    pts = subset_row_points(matrix, subset) + fixed_profile_points(3)
    return interpolate_quadric(pts, rank_tol=rank_tol)


def profile_for_subset(matrix: DoubleAngleMatrix, subset,
                       rank_tol: float = RANK_TOL) -> Quadric:
    """Unique profile quadric of a 4-subset that contains the reference.

    Requires at least 4 measurement rows; raises NonUniqueProfile when the
    data does not pin the surface down (the degeneracy signal consumed by
    the ambiguity analysis).
    """
    sub = tuple(subset)
    if 0 not in sub:
        raise ValueError("subset must contain the reference target (index 0)")
    if matrix.m < 4:
        raise ValueError("need at least 4 measurement rows")
    result = interpolate_subset_profile(matrix, sub, rank_tol=rank_tol)
    return result.unique()


def interpolate_coprofile(matrix: DoubleAngleMatrix,
                          rank_tol: float = RANK_TOL) -> InterpolationResult:
    """Quadrics through the matrix columns: the co-profile of the three
    measure points and the reference target.

    Only defined for exactly 3 measure points (the columns then live in
    P^3).  A dimension above 1 signals a degenerate configuration; with
    fewer than 4 non-reference targets the data can never suffice.
    """
    if matrix.m != 3:
        raise ValueError("co-profile interpolation needs exactly 3 measure rows")
    pts = [coprofile_point_from_column(matrix.column(i)) for i in range(1, matrix.t)]
    pts += fixed_profile_points(3)
    return interpolate_quadric(pts, rank_tol=rank_tol)


@dataclass(frozen=True)
class ProfileModel:
    """Profile of a target tuple with t >= 4, stored as quadrics of its
    4-subsets; downstream identification only ever consumes 4-subsets."""

    t: int
    quadrics: dict

    def quadric_for(self, subset) -> Quadric:
        return self.quadrics[tuple(subset)]

    def subsets(self):
        return self.quadrics.keys()


def build_profile_model(matrix: DoubleAngleMatrix,
                        rank_tol: float = RANK_TOL) -> ProfileModel:
    """Profiles of every reference-containing 4-subset, assembled once."""
    from itertools import combinations

    quads = {}
    for rest in combinations(range(1, matrix.t), 3):
        sub = (0,) + rest
        quads[sub] = profile_for_subset(matrix, sub, rank_tol=rank_tol)
    return ProfileModel(matrix.t, quads)


def _pairing_basis(pairing: str) -> tuple[np.ndarray, np.ndarray]:
    if pairing == "02|13":
        u = np.array([1, 0, 1, 0], dtype=complex)
        v = np.array([0, 1, 0, 1], dtype=complex)
    elif pairing == "01|23":
        u = np.array([1, 1, 0, 0], dtype=complex)
        v = np.array([0, 0, 1, 1], dtype=complex)
    elif pairing == "03|12":
        u = np.array([1, 0, 0, 1], dtype=complex)
        v = np.array([0, 1, 1, 0], dtype=complex)
    else:
        raise ValueError(f"unknown pairing {pairing!r}; use one of {DIAGONAL_PAIRINGS}")
    return u, v


def diagonal_measurement(quadric: Quadric, pairing: str = "02|13",
                         unit_tol: float = 1e-6) -> np.ndarray:
    """Chart of the measurement taken at a diagonal intersection point.

    For a 4-subset (a, b, c, d) and the pairing splitting it into the two
    diagonals a-c and b-d, the crossing point of those diagonals sees both
    diagonal angles as zero mod pi.  On the profile that cuts out the line
    where the paired chart coordinates agree; the quadric meets that line
    in the all-ones point (infinity) and in the sought measurement, whose
    chart this returns.
    """
    u, v = _pairing_basis(pairing)
    q = quadric.matrix
    qa = complex(u @ q @ u)
    qb = complex(u @ q @ v)
    qc = complex(v @ q @ v)
    scale = max(abs(qa), abs(qb), abs(qc))
    if scale == 0:
        raise TangentLine("quadric vanishes identically on the diagonal line")
    disc = qb * qb - qa * qc
    if abs(disc) < 1e-12 * scale**2:
        raise TangentLine("diagonal line is tangent to the profile quadric")
    root = np.sqrt(disc)
    candidates = []
    if abs(qa) > 1e-13 * scale:
        candidates.append((-qb + root) * u + qa * v)
        candidates.append((-qb - root) * u + qa * v)
    else:
        candidates.append(1.0 * u)
        candidates.append(-qc * u + 2 * qb * v)

    def chart_distance_to_ones(s: np.ndarray) -> float:
        if abs(s[0]) < 1e-13 * np.abs(s).max():
            return float("inf")
        return float(np.max(np.abs(s[1:] / s[0] - 1.0)))

    winner = max(candidates, key=chart_distance_to_ones)
    if abs(winner[0]) < 1e-13 * np.abs(winner).max():
        raise NonUnitChart("diagonal measurement lies at infinity of the chart")
    chart = winner[1:] / winner[0]
    if np.max(np.abs(np.abs(chart) - 1.0)) > unit_tol:
        raise NonUnitChart(
            f"chart deviates from the unit circle by {np.max(np.abs(np.abs(chart) - 1.0)):.3e}"
        )
    return chart / np.abs(chart)
