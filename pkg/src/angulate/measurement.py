"""Viewing-angle measurements and the double angle matrix.

The oriented angle at a measure point q from the ray toward a reference
target to the ray toward a second target is the unit complex number

    conj(z - w1) * (z - w2) / |conj(z - w1) * (z - w2)|

with z, w1, w2 the complex coordinates of q and the two targets.  Squaring
drops the ray information and keeps the supporting line: that squared value
is what every reconstruction routine in this package consumes.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import BasePoint, CoincidentPoints
from .geometry import (
    EPS_UNIT,
    DirectedAngle,
    DoubleAngle,
    PlanarPoint,
    as_complex,
    from_complex_array,
)

COINCIDENCE_EPS = 1e-12


@dataclass(frozen=True)
class Configuration:
    """Ordered target and measure point tuples.

    Targets are the unknown points being sighted; measures are the points
    at which angles between targets are recorded.  The first target acts
    as the reference for every stored angle.
    """

    targets: tuple[PlanarPoint, ...]
    measures: tuple[PlanarPoint, ...]

    def __post_init__(self):
        object.__setattr__(self, "targets", tuple(self.targets))
        object.__setattr__(self, "measures", tuple(self.measures))
        if len(self.targets) < 3:
            raise ValueError("need at least 3 targets")
        if len(self.measures) < 1:
            raise ValueError("need at least 1 measure point")
        pts = list(self.targets)
        for i in range(len(pts)):
            for j in range(i + 1, len(pts)):
                if pts[i].distance(pts[j]) <= COINCIDENCE_EPS:
                    raise ValueError(f"targets {i} and {j} coincide")
        ms = list(self.measures)
        for i in range(len(ms)):
            for j in range(i + 1, len(ms)):
                if ms[i].distance(ms[j]) <= COINCIDENCE_EPS:
                    raise ValueError(f"measures {i} and {j} coincide")
        for j, q in enumerate(ms):
            for i, p in enumerate(pts):
                if q.distance(p) <= COINCIDENCE_EPS:
                    raise ValueError(f"measure {j} coincides with target {i}")

    @property
    def t(self) -> int:
        return len(self.targets)

    @property
    def m(self) -> int:
        return len(self.measures)

    def all_points(self) -> tuple[PlanarPoint, ...]:
        return self.targets + self.measures


@dataclass(frozen=True)
class ProjectivePoint:
    """Point of complex projective space; equality is up to scale."""

    coords: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.coords, dtype=complex)
        if v.ndim != 1 or v.shape[0] < 2:
            raise ValueError("need a homogeneous coordinate vector")
        if not np.any(np.abs(v) > 0):
            raise ValueError("zero vector is not a projective point")
        object.__setattr__(self, "coords", v)

    @property
    def dim(self) -> int:
        return self.coords.shape[0] - 1

    def chart(self) -> np.ndarray:
        """Affine coordinates in the chart where the first coordinate is 1."""
        c0 = self.coords[0]
        if abs(c0) < 1e-15 * np.abs(self.coords).max():
            raise ZeroDivisionError("point at infinity of the first chart")
        return self.coords[1:] / c0

    def same_as(self, other: "ProjectivePoint", tol: float = 1e-9) -> bool:
        a = self.coords / np.linalg.norm(self.coords)
        b = other.coords / np.linalg.norm(other.coords)
        k = int(np.argmax(np.abs(a)))
        phase = b[k] / a[k]
        if abs(abs(phase) - 1.0) > tol:
            return False
        return bool(np.max(np.abs(a * phase - b)) < tol)


@dataclass(frozen=True)
class DoubleAngleMatrix:
    """m x (t-1) array of squared viewing angles, row j = measure j,
    column i-1 = angle at measure j between target 0 and target i."""

    entries: np.ndarray
    t: int = field(default=0)
    m: int = field(default=0)

    def __post_init__(self):
        e = np.asarray(self.entries, dtype=complex)
        if e.ndim != 2:
            raise ValueError("entries must be a 2-d array")
        m, tm1 = e.shape
        t = self.t or tm1 + 1
        if (t, m) != (tm1 + 1, m) or (self.m and self.m != m):
            raise ValueError(f"shape {e.shape} inconsistent with t={self.t}, m={self.m}")
        if np.max(np.abs(np.abs(e) - 1.0)) > 1e-6:
            raise ValueError("matrix entries must be unit modulus")
        object.__setattr__(self, "entries", e / np.abs(e))
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "m", m)

    def row(self, j: int) -> np.ndarray:
        return self.entries[j]

    def column(self, i: int) -> np.ndarray:
        """Column for target i (1-based over targets, i >= 1)."""
        return self.entries[:, i - 1]


@dataclass(frozen=True)
class DirectedAngleMatrix:
    """Like DoubleAngleMatrix but with full mod-2pi ray information."""

    entries: np.ndarray
    t: int = field(default=0)
    m: int = field(default=0)

    def __post_init__(self):
        e = np.asarray(self.entries, dtype=complex)
        if e.ndim != 2:
            raise ValueError("entries must be a 2-d array")
        if np.max(np.abs(np.abs(e) - 1.0)) > 1e-6:
            raise ValueError("matrix entries must be unit modulus")
        object.__setattr__(self, "entries", e / np.abs(e))
        object.__setattr__(self, "t", self.t or e.shape[1] + 1)
        object.__setattr__(self, "m", e.shape[0])

    def squared(self) -> DoubleAngleMatrix:
        return DoubleAngleMatrix(self.entries**2)


def directed_angle(q: PlanarPoint, p1: PlanarPoint, p2: PlanarPoint) -> DirectedAngle:
    """Oriented angle at q from the ray toward p1 to the ray toward p2."""
    z, w1, w2 = q.z, p1.z, p2.z
    if abs(z - w1) <= COINCIDENCE_EPS or abs(z - w2) <= COINCIDENCE_EPS:
        raise CoincidentPoints("measure point coincides with a target")
    v = (z - w1).conjugate() * (z - w2)
    return v / abs(v)


def double_angle(q: PlanarPoint, p1: PlanarPoint, p2: PlanarPoint) -> DoubleAngle:
    """Squared oriented angle: the line through q and a target, mod pi."""
    return directed_angle(q, p1, p2) ** 2


def measurement_map(targets, q: PlanarPoint) -> ProjectivePoint:
    """Projective measurement of ``q`` against a target tuple.

    Coordinate k is the product of (z - w_k) with the conjugates of all
    other (z - w_i), each factor normalized to unit modulus; dividing by
    the first coordinate recovers the squared angles against target 0.
    """
    ws = as_complex(targets)
    z = q.z
    diffs = z - ws
    if np.min(np.abs(diffs)) <= COINCIDENCE_EPS:
        raise BasePoint("measurement map is undefined at a target")
    units = diffs / np.abs(diffs)
    total = np.prod(np.conj(units))
    coords = np.array([u * total / np.conj(u) for u in units])
    return ProjectivePoint(coords)


def double_angle_matrix(cfg: Configuration) -> DoubleAngleMatrix:
    """Squared-angle matrix of a configuration: the whole algebraic input
    of the reconstruction problem."""
    return DoubleAngleMatrix(
        np.array(
            [
                [double_angle(q, cfg.targets[0], cfg.targets[i]) for i in range(1, cfg.t)]
                for q in cfg.measures
            ]
        )
    )


def directed_angle_matrix(cfg: Configuration) -> DirectedAngleMatrix:
    """Directed (unsquared) companion of double_angle_matrix."""
    return DirectedAngleMatrix(
        np.array(
            [
                [directed_angle(q, cfg.targets[0], cfg.targets[i]) for i in range(1, cfg.t)]
                for q in cfg.measures
            ]
        )
    )


def rereference(d_ref_a: DoubleAngle, d_ref_b: DoubleAngle) -> DoubleAngle:
    """Angle between targets a and b from the two reference angles.

    Angles at a common vertex add: the angle from a to b equals the angle
    from the reference to b minus the angle from the reference to a.
    """
    v = d_ref_b / d_ref_a
    return v / abs(v)


def profile_point_from_row(row) -> ProjectivePoint:
    """Homogenize one measurement row with leading coordinate 1."""
    r = np.asarray(row, dtype=complex)
    return ProjectivePoint(np.concatenate(([1.0 + 0.0j], r)))


def coprofile_point_from_column(col) -> ProjectivePoint:
    """Homogenize one matrix column with leading coordinate 1."""
    c = np.asarray(col, dtype=complex)
    return ProjectivePoint(np.concatenate(([1.0 + 0.0j], c)))


def canonical_configuration(cfg: Configuration) -> Configuration:
    """Representative with target 0 at the origin and target 1 at (1, 0).

    The orientation-preserving similarity doing this is unique, so equal
    canonical coordinates mean similar configurations.
    """
    z0, z1 = cfg.targets[0].z, cfg.targets[1].z
    a = 1.0 / (z1 - z0)
    zs = as_complex(cfg.all_points())
    moved = (zs - z0) * a
    t = cfg.t
    return Configuration(from_complex_array(moved[:t]), from_complex_array(moved[t:]))


def matrix_mismatch(cfg: Configuration, matrix: DoubleAngleMatrix) -> float:
    """Largest entrywise distance between the configuration's squared
    angles and a given matrix."""
    return float(np.max(np.abs(double_angle_matrix(cfg).entries - matrix.entries)))
