"""Scenario generation and the JSON file formats used by the batch tools.

All files are versioned JSON with explicit field names.  Angles are
serialized as (re, im) pairs of their unit complex values, never as
radians, so measurement files round-trip without loss.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .ambiguity import degeneracy_flags
from .errors import InvalidShape
from .geometry import PlanarPoint
from .measurement import (
    Configuration,
    DirectedAngleMatrix,
    DoubleAngleMatrix,
    directed_angle_matrix,
)

SCENARIO_SCHEMA = "angulate.scenario/1"
MATRICES_SCHEMA = "angulate.matrices/1"
REPORT_SCHEMA = "angulate.report/1"

MIN_SEPARATION = 0.05

FAMILIES = (
    "generic",
    "cocircular-targets",
    "cocircular-measures",
    "cyclic-cubic",
    "collinear-targets",
    "fig2",
)


@dataclass(frozen=True)
class Scenario:
    """A generated ground-truth configuration plus its provenance."""

    t: int
    m: int
    targets: tuple[PlanarPoint, ...]
    measures: tuple[PlanarPoint, ...]
    seed: int | None = None
    generator: str = "generic"
    jitter: float = 0.0
    schema: str = SCENARIO_SCHEMA

    def configuration(self) -> Configuration:
        return Configuration(self.targets, self.measures)

    def to_dict(self) -> dict:
        return {
            "schema": self.schema,
            "t": self.t,
            "m": self.m,
            "targets": [[p.x, p.y] for p in self.targets],
            "measures": [[p.x, p.y] for p in self.measures],
            "seed": self.seed,
            "generator": self.generator,
            "jitter": self.jitter,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Scenario":
        if data.get("schema") != SCENARIO_SCHEMA:
            raise ValueError(f"unsupported scenario schema {data.get('schema')!r}")
        return cls(
            t=int(data["t"]),
            m=int(data["m"]),
            targets=tuple(PlanarPoint(float(x), float(y)) for x, y in data["targets"]),
            measures=tuple(PlanarPoint(float(x), float(y)) for x, y in data["measures"]),
            seed=data.get("seed"),
            generator=data.get("generator", "unknown"),
            jitter=float(data.get("jitter", 0.0)),
        )


def _min_separation(points) -> float:
    zs = [p.z for p in points]
    return min(
        abs(a - b) for i, a in enumerate(zs) for b in zs[i + 1:]
    )


def _random_points(rng: np.random.Generator, n: int) -> list[PlanarPoint]:
    return [PlanarPoint(float(x), float(y)) for x, y in rng.uniform(-1.0, 1.0, (n, 2))]


def _circle_points(rng: np.random.Generator, n: int, center: complex,
                   radius: float) -> list[PlanarPoint]:
    angles = rng.uniform(0.0, 2.0 * np.pi, n)
    return [PlanarPoint.from_complex(center + radius * np.exp(1j * a)) for a in angles]


def _line_points(rng: np.random.Generator, n: int, anchor: complex,
                 direction: complex) -> list[PlanarPoint]:
    params = rng.uniform(-1.0, 1.0, n)
    return [PlanarPoint.from_complex(anchor + s * direction) for s in params]


def generate(family: str, t: int, m: int, seed: int = 0,
             jitter: float = 0.0, max_tries: int = 500) -> Scenario:
    """Deterministic scenario of a named family.

    Rejection-samples until all points are at least MIN_SEPARATION apart;
    the generic family additionally rejects draws that trip any
    degeneracy flag.
    """
    if family not in FAMILIES:
        raise ValueError(f"unknown family {family!r}; choose from {FAMILIES}")
    if family == "fig2":
        t, m = 4, 4
    if t < 3:
        raise InvalidShape(f"need at least 3 targets, got t={t}")
    if m < 1:
        raise InvalidShape(f"need at least 1 measure point, got m={m}")
    rng = np.random.default_rng(seed)
    for _ in range(max_tries):
        if family == "generic":
            targets = _random_points(rng, t)
            measures = _random_points(rng, m)
        elif family == "cocircular-targets":
            center = complex(rng.uniform(-0.3, 0.3), rng.uniform(-0.3, 0.3))
            radius = rng.uniform(0.6, 1.0)
            targets = _circle_points(rng, t, center, radius)
            measures = _random_points(rng, m)
        elif family == "cocircular-measures":
            center = complex(rng.uniform(-0.3, 0.3), rng.uniform(-0.3, 0.3))
            radius = rng.uniform(0.6, 1.0)
            targets = _random_points(rng, t)
            measures = _circle_points(rng, m, center, radius)
        elif family == "collinear-targets":
            anchor = complex(rng.uniform(-0.2, 0.2), rng.uniform(-0.2, 0.2))
            angle = rng.uniform(0.0, np.pi)
            targets = _line_points(rng, t, anchor, np.exp(1j * angle))
            measures = _random_points(rng, m)
        elif family == "cyclic-cubic":
            center = complex(rng.uniform(-0.3, 0.3), rng.uniform(-0.3, 0.3))
            radius = rng.uniform(0.6, 1.0)
            anchor = complex(rng.uniform(-0.2, 0.2), rng.uniform(-0.2, 0.2))
            angle = rng.uniform(0.0, np.pi)
            targets = _circle_points(rng, t, center, radius)
            measures = _line_points(rng, m, anchor, np.exp(1j * angle))
        else:  # fig2
            center = complex(rng.uniform(-0.3, 0.3), rng.uniform(-0.3, 0.3))
            radius = rng.uniform(0.6, 1.0)
            targets = _circle_points(rng, 4, center, radius)
            on_circle = _circle_points(rng, 2, center, radius)
            anchor = complex(rng.uniform(-0.2, 0.2), rng.uniform(-0.2, 0.2))
            angle = rng.uniform(0.0, np.pi)
            on_line = _line_points(rng, 2, anchor, np.exp(1j * angle))
            measures = on_circle + on_line
        pts = targets + measures
        if _min_separation(pts) < MIN_SEPARATION:
            continue
        if family == "generic" and degeneracy_flags((targets, measures)):
            continue
        return Scenario(t, m, tuple(targets), tuple(measures), seed, family, jitter)
    raise RuntimeError(f"could not draw a valid {family} scenario in {max_tries} tries")


@dataclass(frozen=True)
class MeasurementSet:
    """Double and directed angle matrices of one scenario, serializable."""

    t: int
    m: int
    double: DoubleAngleMatrix
    directed: DirectedAngleMatrix
    jitter: float = 0.0
    schema: str = MATRICES_SCHEMA

    @classmethod
    def measure(cls, scenario: Scenario, seed: int | None = None) -> "MeasurementSet":
        """Measure a scenario, applying its uniform angular jitter if any."""
        cfg = scenario.configuration()
        directed = directed_angle_matrix(cfg)
        entries = directed.entries
        if scenario.jitter > 0.0:
            rng = np.random.default_rng(scenario.seed if seed is None else seed)
            noise = rng.uniform(-scenario.jitter, scenario.jitter, entries.shape)
            entries = entries * np.exp(1j * noise)
        directed = DirectedAngleMatrix(entries)
        return cls(cfg.t, cfg.m, directed.squared(), directed, scenario.jitter)

    def to_dict(self) -> dict:
        pack = lambda arr: [[[z.real, z.imag] for z in row] for row in arr]
        return {
            "schema": self.schema,
            "t": self.t,
            "m": self.m,
            "double": pack(self.double.entries),
            "directed": pack(self.directed.entries),
            "jitter": self.jitter,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "MeasurementSet":
        if data.get("schema") != MATRICES_SCHEMA:
            raise ValueError(f"unsupported matrices schema {data.get('schema')!r}")
        unpack = lambda rows: np.array(
            [[complex(re, im) for re, im in row] for row in rows]
        )
        return cls(
            t=int(data["t"]),
            m=int(data["m"]),
            double=DoubleAngleMatrix(unpack(data["double"])),
            directed=DirectedAngleMatrix(unpack(data["directed"])),
            jitter=float(data.get("jitter", 0.0)),
        )


@dataclass(frozen=True)
class SolutionReport:
    """Machine-readable outcome of one solve run."""

    kind: str
    branch: str
    t: int
    m: int
    solutions: tuple[dict, ...] = ()
    reasons: tuple[str, ...] = ()
    residuals: dict = field(default_factory=dict)
    notes: tuple[str, ...] = ()
    schema: str = REPORT_SCHEMA

    def to_dict(self) -> dict:
        return {
            "schema": self.schema,
            "kind": self.kind,
            "branch": self.branch,
            "t": self.t,
            "m": self.m,
            "solutions": list(self.solutions),
            "reasons": list(self.reasons),
            "residuals": self.residuals,
            "notes": list(self.notes),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "SolutionReport":
        if data.get("schema") != REPORT_SCHEMA:
            raise ValueError(f"unsupported report schema {data.get('schema')!r}")
        return cls(
            kind=data["kind"],
            branch=data["branch"],
            t=int(data["t"]),
            m=int(data["m"]),
            solutions=tuple(data.get("solutions", ())),
            reasons=tuple(data.get("reasons", ())),
            residuals=data.get("residuals", {}),
            notes=tuple(data.get("notes", ())),
        )

    @classmethod
    def from_solution_set(cls, outcome, report) -> "SolutionReport":
        sols = tuple(
            {
                "targets": [[p.x, p.y] for p in cfg.targets],
                "measures": [[p.x, p.y] for p in cfg.measures],
            }
            for cfg in outcome.solutions
        )
        return cls(
            kind=outcome.kind.value,
            branch=report.branch,
            t=report.t,
            m=report.m,
            solutions=sols,
            reasons=outcome.reasons,
            residuals={k: float(v) for k, v in outcome.residuals.items()},
            notes=report.notes,
        )

    def configurations(self) -> tuple[Configuration, ...]:
        return tuple(
            Configuration(
                tuple(PlanarPoint(float(x), float(y)) for x, y in sol["targets"]),
                tuple(PlanarPoint(float(x), float(y)) for x, y in sol["measures"]),
            )
            for sol in self.solutions
        )


def save_json(obj, path) -> None:
    Path(path).write_text(json.dumps(obj.to_dict(), indent=2, sort_keys=True) + "\n")


def _load(path) -> dict:
    return json.loads(Path(path).read_text())


def load_scenario(path) -> Scenario:
    return Scenario.from_dict(_load(path))


def load_measurements(path) -> MeasurementSet:
    return MeasurementSet.from_dict(_load(path))


def load_report(path) -> SolutionReport:
    return SolutionReport.from_dict(_load(path))
