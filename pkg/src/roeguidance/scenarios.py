"""Scenario schema, YAML serialization, and the bundled mission cases.

A scenario file is a `roe-scenario/1` YAML document. Every numeric
scalar carries an explicit unit suffix ("6771 km", "0.2 orbits",
"2 deg/s"); state vectors are mappings with a shared unit. Durations
given in orbits are normalized against the chief's Keplerian period at
load time, so the in-memory Scenario is always in SI units.
"""

from __future__ import annotations

import math
import os
import warnings
from dataclasses import dataclass, replace
from importlib import resources
from pathlib import Path

import numpy as np
import yaml

from .dynamics import rtn_map
from .formulation import DeputySpec
from .orbits import (
    J2_EARTH,
    MU_EARTH,
    R_EARTH,
    ChiefOrbit,
    DimRoeState,
    OrbitalElements,
)
from .polyhedron import PolyhedronSpec
from .timegrid import TimeGrid, build_time_grid, min_coast_duration

SCENARIO_FORMAT = "roe-scenario/1"
BUNDLED_NAMES = (
    "case-study",
    "reconfig-1",
    "reconfig-2",
    "reconfig-3",
    "reconfig-4",
)
DATA_DIR_ENV = "ROEGUIDANCE_DATA_DIR"

_UNITS: dict[str, dict[str, float]] = {
    "length": {"m": 1.0, "km": 1e3},
    "time": {"s": 1.0, "min": 60.0, "h": 3600.0},
    "angle": {"rad": 1.0, "deg": math.pi / 180.0},
    "rate": {"rad/s": 1.0, "deg/s": math.pi / 180.0},
    "force": {"N": 1.0, "mN": 1e-3, "uN": 1e-6},
    "mass": {"kg": 1.0, "g": 1e-3},
}


class ScenarioFormatError(ValueError):
    """Schema violation; the message names the offending field path."""


def _quantity(
    raw, kind: str, field: str, orbit_period: float | None = None
) -> float:
    """Parse '<number> <unit>' into SI; 'orbits' needs the chief period."""
    if isinstance(raw, (int, float)):
        raise ScenarioFormatError(
            f"{field}: bare number {raw!r}; write an explicit unit"
        )
    parts = str(raw).split()
    if len(parts) != 2:
        raise ScenarioFormatError(
            f"{field}: expected '<number> <unit>', got {raw!r}"
        )
    try:
        value = float(parts[0])
    except ValueError as exc:
        raise ScenarioFormatError(f"{field}: bad number {parts[0]!r}") from exc
    unit = parts[1]
    if kind == "time" and unit in ("orbit", "orbits"):
        if orbit_period is None:
            raise ScenarioFormatError(
                f"{field}: orbit-based duration needs the chief defined first"
            )
        return value * orbit_period
    table = _UNITS[kind]
    if unit not in table:
        raise ScenarioFormatError(
            f"{field}: unknown {kind} unit {unit!r}; expected one of "
            f"{sorted(table)}"
        )
    return value * table[unit]


def _dimensionless(raw, field: str) -> float:
    if not isinstance(raw, (int, float)):
        raise ScenarioFormatError(f"{field}: expected a bare number, got {raw!r}")
    return float(raw)


def _state_vector(raw, field: str) -> DimRoeState:
    if not isinstance(raw, dict) or set(raw) != {"unit", "values"}:
        raise ScenarioFormatError(
            f"{field}: expected a mapping with 'unit' and 'values'"
        )
    unit = raw["unit"]
    if unit not in _UNITS["length"]:
        raise ScenarioFormatError(f"{field}.unit: unknown length unit {unit!r}")
    values = raw["values"]
    if not isinstance(values, list) or len(values) != 6:
        raise ScenarioFormatError(f"{field}.values: expected 6 numbers")
    arr = np.array([float(v) for v in values]) * _UNITS["length"][unit]
    return DimRoeState(arr)


@dataclass(frozen=True)
class Scenario:
    """Complete problem statement for one reconfiguration.

    All quantities are SI: durations in seconds, r_ca in meters,
    omega_max in rad/s. n_burns None means the automatic burn count.
    """

    name: str
    chief: ChiefOrbit
    deputies: tuple[DeputySpec, ...]
    duration: float
    t_forced: float
    t_natural: float
    omega_max: float
    t_safety: float
    r_ca: float
    poly: PolyhedronSpec
    n_burns: int | None = None
    description: str = ""

    def __post_init__(self) -> None:
        if not self.deputies:
            raise ValueError("a scenario needs at least one deputy")
        if self.duration <= 0.0 or self.t_forced <= 0.0 or self.t_natural <= 0.0:
            raise ValueError("durations must be positive")
        if self.r_ca < 0.0:
            raise ValueError(f"r_ca must be nonnegative, got {self.r_ca}")
        if self.r_ca > 0.0:
            t0_map = rtn_map(self.chief, 0.0)
            for i in range(len(self.deputies)):
                for j in range(i + 1, len(self.deputies)):
                    rel = (
                        self.deputies[i].y0.as_array()
                        - self.deputies[j].y0.as_array()
                    )
                    dist = float(np.linalg.norm(t0_map @ rel))
                    if dist < self.r_ca:
                        warnings.warn(
                            f"deputies {i} and {j} start {dist:.1f} m apart, "
                            f"inside the keep-out radius {self.r_ca:.1f} m",
                            stacklevel=2,
                        )

    @property
    def n_deputies(self) -> int:
        return len(self.deputies)

    @property
    def min_coast(self) -> float:
        return min_coast_duration(self.omega_max, self.t_safety)

    def build_grid(self) -> TimeGrid:
        return build_time_grid(
            self.duration,
            self.t_forced,
            self.t_natural,
            self.n_burns,
            self.min_coast,
        )


def scenario_from_dict(doc: dict) -> Scenario:
    if not isinstance(doc, dict):
        raise ScenarioFormatError("document root must be a mapping")
    if doc.get("format") != SCENARIO_FORMAT:
        raise ScenarioFormatError(
            f"format: expected {SCENARIO_FORMAT!r}, got {doc.get('format')!r}"
        )

    def need(mapping, key, where):
        if key not in mapping:
            raise ScenarioFormatError(f"{where}.{key}: missing")
        return mapping[key]

    ch = need(doc, "chief", "document")
    a = _quantity(need(ch, "a", "chief"), "length", "chief.a")
    ecc = _dimensionless(need(ch, "e", "chief"), "chief.e")
    arg_p = _quantity(need(ch, "arg_perigee", "chief"), "angle", "chief.arg_perigee")
    inc = _quantity(need(ch, "i", "chief"), "angle", "chief.i")
    raan = _quantity(need(ch, "raan", "chief"), "angle", "chief.raan")
    theta = _quantity(
        need(ch, "arg_latitude", "chief"), "angle", "chief.arg_latitude"
    )
    elements = OrbitalElements(
        a=a,
        theta=theta,
        e_x=ecc * math.cos(arg_p),
        e_y=ecc * math.sin(arg_p),
        i=inc,
        raan=raan,
    )
    chief = ChiefOrbit(
        elements,
        mu=float(ch.get("mu", MU_EARTH)),
        j2=float(ch.get("j2", J2_EARTH)),
        r_earth=float(ch.get("r_earth", R_EARTH)),
    )

    grid = need(doc, "grid", "document")
    duration = _quantity(
        need(grid, "duration", "grid"), "time", "grid.duration", chief.period
    )
    t_forced = _quantity(
        need(grid, "t_forced", "grid"), "time", "grid.t_forced", chief.period
    )
    t_natural = _quantity(
        need(grid, "t_natural", "grid"), "time", "grid.t_natural", chief.period
    )
    raw_burns = grid.get("n_burns", "auto")
    if raw_burns == "auto":
        n_burns = None
    elif isinstance(raw_burns, int) and raw_burns >= 1:
        n_burns = raw_burns
    else:
        raise ScenarioFormatError(
            f"grid.n_burns: expected 'auto' or a positive integer, "
            f"got {raw_burns!r}"
        )

    safety = need(doc, "safety", "document")
    omega_max = _quantity(
        need(safety, "omega_max", "safety"), "rate", "safety.omega_max"
    )
    t_safety = _quantity(
        need(safety, "t_safety", "safety"), "time", "safety.t_safety"
    )
    r_ca = _quantity(need(safety, "r_ca", "safety"), "length", "safety.r_ca")

    poly_doc = need(doc, "thrust_polyhedron", "document")
    poly = PolyhedronSpec(
        n_dir=int(
            _dimensionless(
                need(poly_doc, "n_dir", "thrust_polyhedron"),
                "thrust_polyhedron.n_dir",
            )
        ),
        scale_c=_dimensionless(
            need(poly_doc, "scale_c", "thrust_polyhedron"),
            "thrust_polyhedron.scale_c",
        ),
    )

    deps_doc = need(doc, "deputies", "document")
    if not isinstance(deps_doc, list) or not deps_doc:
        raise ScenarioFormatError("deputies: expected a nonempty list")
    deputies = []
    for idx, dep in enumerate(deps_doc):
        where = f"deputies[{idx}]"
        deputies.append(
            DeputySpec(
                y0=_state_vector(need(dep, "y0", where), f"{where}.y0"),
                yf=_state_vector(need(dep, "yf", where), f"{where}.yf"),
                f_max=_quantity(
                    need(dep, "f_max", where), "force", f"{where}.f_max"
                ),
                mass=_quantity(need(dep, "mass", where), "mass", f"{where}.mass"),
                label=str(dep.get("name", f"deputy-{idx}")),
            )
        )

    return Scenario(
        name=str(doc.get("name", "unnamed")),
        chief=chief,
        deputies=tuple(deputies),
        duration=duration,
        t_forced=t_forced,
        t_natural=t_natural,
        omega_max=omega_max,
        t_safety=t_safety,
        r_ca=r_ca,
        poly=poly,
        n_burns=n_burns,
        description=str(doc.get("description", "")),
    )


def scenario_to_dict(scenario: Scenario) -> dict:
    """Inverse of scenario_from_dict, emitting SI units throughout."""
    el = scenario.chief.elements
    doc = {
        "format": SCENARIO_FORMAT,
        "name": scenario.name,
        "description": scenario.description,
        "chief": {
            "a": f"{el.a!r} m",
            "e": float(el.eccentricity),
            "arg_perigee": f"{el.arg_perigee!r} rad",
            "i": f"{el.i!r} rad",
            "raan": f"{el.raan!r} rad",
            "arg_latitude": f"{el.theta!r} rad",
            "mu": float(scenario.chief.mu),
            "j2": float(scenario.chief.j2),
            "r_earth": float(scenario.chief.r_earth),
        },
        "grid": {
            "duration": f"{scenario.duration!r} s",
            "t_forced": f"{scenario.t_forced!r} s",
            "t_natural": f"{scenario.t_natural!r} s",
            "n_burns": "auto" if scenario.n_burns is None else scenario.n_burns,
        },
        "safety": {
            "omega_max": f"{scenario.omega_max!r} rad/s",
            "t_safety": f"{scenario.t_safety!r} s",
            "r_ca": f"{scenario.r_ca!r} m",
        },
        "thrust_polyhedron": {
            "n_dir": scenario.poly.n_dir,
            "scale_c": float(scenario.poly.scale_c),
        },
        "deputies": [
            {
                "name": dep.label,
                "mass": f"{dep.mass!r} kg",
                "f_max": f"{dep.f_max!r} N",
                "y0": {"unit": "m", "values": dep.y0.as_array().tolist()},
                "yf": {"unit": "m", "values": dep.yf.as_array().tolist()},
            }
            for dep in scenario.deputies
        ],
    }
    return doc


def loads_scenario(text: str) -> Scenario:
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ScenarioFormatError(f"invalid YAML: {exc}") from exc
    return scenario_from_dict(doc)


def load_scenario(path: str | Path) -> Scenario:
    return loads_scenario(Path(path).read_text())


def save_scenario(scenario: Scenario, path: str | Path) -> None:
    Path(path).write_text(
        yaml.safe_dump(scenario_to_dict(scenario), sort_keys=False)
    )


def data_dir() -> Path:
    """Bundled scenario directory, overridable via ROEGUIDANCE_DATA_DIR."""
    override = os.environ.get(DATA_DIR_ENV)
    if override:
        return Path(override)
    return Path(resources.files("roeguidance") / "data")


def bundled_scenarios() -> tuple[str, ...]:
    return BUNDLED_NAMES


def load_bundled(name: str) -> Scenario:
    if name not in BUNDLED_NAMES:
        raise KeyError(
            f"unknown bundled scenario {name!r}; choose from {BUNDLED_NAMES}"
        )
    return load_scenario(data_dir() / f"{name}.yaml")


def resolve_scenario(ref: str) -> Scenario:
    """Accept either a bundled scenario name or a file path."""
    if ref in BUNDLED_NAMES:
        return load_bundled(ref)
    path = Path(ref)
    if not path.exists():
        raise FileNotFoundError(
            f"{ref!r} is neither a bundled scenario ({', '.join(BUNDLED_NAMES)}) "
            f"nor an existing file"
        )
    return load_scenario(path)


def coplanar_to_pco_scenario(
    n_deputies: int,
    spacing: float = 200.0,
    pco_radius: float = 500.0,
    duration_orbits: float = 10.0,
    chief: ChiefOrbit | None = None,
) -> Scenario:
    """Generate the along-track-line to projected-circular-orbit family.

    Deputies start on the chief's track at multiples of the spacing
    (+1, -1, +2, -2, ... slots) and end evenly phased on a PCO of the
    given radius: phase phi_j = 2 pi (j-1)/N with relative eccentricity
    (r/2)(-sin phi, -cos phi) and relative inclination
    r (cos phi, -sin phi), matching the bundled case study at N = 4.
    """
    if not 1 <= n_deputies <= 20:
        raise ValueError(f"n_deputies must be in 1..20, got {n_deputies}")
    if chief is None:
        chief = ChiefOrbit(
            OrbitalElements(
                a=6771e3,
                theta=math.pi,
                e_x=1e-3,
                e_y=0.0,
                i=math.radians(98.0),
                raan=0.0,
            )
        )
    deputies = []
    for j in range(1, n_deputies + 1):
        slot = (j + 1) // 2 * (1 if j % 2 == 1 else -1)
        phi = 2.0 * math.pi * (j - 1) / n_deputies
        y0 = np.array([0.0, spacing * slot, 0.0, 0.0, 0.0, 0.0])
        yf = np.array(
            [
                0.0,
                0.0,
                -0.5 * pco_radius * math.sin(phi),
                -0.5 * pco_radius * math.cos(phi),
                pco_radius * math.cos(phi),
                -pco_radius * math.sin(phi),
            ]
        )
        deputies.append(
            DeputySpec(
                y0=DimRoeState(y0),
                yf=DimRoeState(yf),
                f_max=7e-3,
                mass=200.0,
                label=f"deputy-{j}",
            )
        )
    return Scenario(
        name=f"coplanar-to-pco-{n_deputies}",
        chief=chief,
        deputies=tuple(deputies),
        duration=duration_orbits * chief.period,
        t_forced=0.2 * chief.period,
        t_natural=100.0,
        omega_max=math.radians(2.0),
        t_safety=10.0,
        r_ca=100.0,
        poly=PolyhedronSpec(n_dir=12, scale_c=1.017),
        description=(
            f"{n_deputies} deputies from a {spacing:.0f} m along-track line "
            f"to a {pco_radius:.0f} m projected circular orbit"
        ),
    )


def without_collision(scenario: Scenario) -> Scenario:
    """Copy of the scenario with the keep-out radius disabled."""
    return replace(scenario, r_ca=0.0)
