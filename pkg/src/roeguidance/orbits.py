"""Orbit state types and quasi-nonsingular relative orbital element transforms."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

MU_EARTH = 3.986004418e14
J2_EARTH = 1.08262668e-3
R_EARTH = 6.378137e6

ROE_LABELS = ("da", "dlambda", "dex", "dey", "dix", "diy")

# |roe| above this is outside the regime where the linear model is trustworthy
LINEAR_RANGE = 1e-2


def _wrap_pi(angle: float) -> float:
    """Wrap an angle to [-pi, pi)."""
    return (angle + math.pi) % (2.0 * math.pi) - math.pi


@dataclass(frozen=True)
class OrbitalElements:
    """Quasi-nonsingular mean orbital elements of a near-circular orbit.

    Attributes:
        a: semi-major axis [m].
        theta: mean argument of latitude (mean anomaly + argument of
            perigee) [rad].
        e_x: eccentricity vector component e*cos(argument of perigee).
        e_y: eccentricity vector component e*sin(argument of perigee).
        i: inclination [rad].
        raan: right ascension of the ascending node [rad].
    """

    a: float
    theta: float
    e_x: float
    e_y: float
    i: float
    raan: float

    def __post_init__(self) -> None:
        if not self.a > 0.0:
            raise ValueError(f"semi-major axis must be positive, got {self.a}")
        if not self.eccentricity < 1.0:
            raise ValueError(
                f"eccentricity must be < 1, got {self.eccentricity}"
            )
        if not 0.0 < self.i < math.pi:
            raise ValueError(
                f"inclination must lie strictly inside (0, pi), got {self.i}"
            )

    @property
    def eccentricity(self) -> float:
        return math.hypot(self.e_x, self.e_y)

    @property
    def arg_perigee(self) -> float:
        return math.atan2(self.e_y, self.e_x)


@dataclass(frozen=True)
class RoeVector:
    """Dimensionless quasi-nonsingular relative orbital elements.

    Components: relative semi-major axis da, relative mean longitude
    dlambda, relative eccentricity vector (dex, dey), relative
    inclination vector (dix, diy).
    """

    da: float
    dlambda: float
    dex: float
    dey: float
    dix: float
    diy: float

    def __post_init__(self) -> None:
        worst = max(abs(v) for v in self.as_array())
        if worst > LINEAR_RANGE:
            warnings.warn(
                f"relative orbital elements reach {worst:.3e}, beyond the "
                f"linear-model range {LINEAR_RANGE:.0e}",
                stacklevel=2,
            )

    def as_array(self) -> np.ndarray:
        return np.array(
            [self.da, self.dlambda, self.dex, self.dey, self.dix, self.diy]
        )

    @classmethod
    def from_array(cls, values: np.ndarray) -> "RoeVector":
        values = np.asarray(values, dtype=float)
        if values.shape != (6,):
            raise ValueError(f"expected 6 components, got shape {values.shape}")
        return cls(*values.tolist())


@dataclass(frozen=True, eq=False)
class DimRoeState:
    """Dimensional relative state y = a_chief * roe, in meters."""

    values: np.ndarray

    def __post_init__(self) -> None:
        arr = np.array(self.values, dtype=float)
        if arr.shape != (6,):
            raise ValueError(f"expected 6 components, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("state components must be finite")
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)

    def as_array(self) -> np.ndarray:
        return np.array(self.values)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, DimRoeState):
            return NotImplemented
        return bool(np.array_equal(self.values, other.values))


@dataclass(frozen=True)
class ChiefOrbit:
    """Uncontrolled chief orbit plus the gravity model constants.

    Attributes:
        elements: chief mean elements at the plan start epoch t = 0.
        mu: gravitational parameter [m^3/s^2].
        j2: second zonal harmonic coefficient (set 0 for pure Kepler).
        r_earth: equatorial radius used by the J2 term [m].
    """

    elements: OrbitalElements
    mu: float = MU_EARTH
    j2: float = J2_EARTH
    r_earth: float = R_EARTH

    def __post_init__(self) -> None:
        if self.mu <= 0.0 or self.r_earth <= 0.0:
            raise ValueError("mu and r_earth must be positive")

    @property
    def a(self) -> float:
        return self.elements.a

    @property
    def mean_motion(self) -> float:
        """Keplerian mean motion n = sqrt(mu / a^3) [rad/s]."""
        return math.sqrt(self.mu / self.elements.a**3)

    @property
    def period(self) -> float:
        """Keplerian orbit period 2*pi/n [s]."""
        return 2.0 * math.pi / self.mean_motion


def roe_from_elements(
    deputy: OrbitalElements, chief: OrbitalElements
) -> RoeVector:
    """Map absolute deputy/chief elements to relative orbital elements.

    Angle differences are wrapped to [-pi, pi) so that co-orbiting pairs
    near the 0/2*pi seam map to small values.
    """
    d_theta = _wrap_pi(deputy.theta - chief.theta)
    d_raan = _wrap_pi(deputy.raan - chief.raan)
    return RoeVector(
        da=(deputy.a - chief.a) / chief.a,
        dlambda=d_theta + d_raan * math.cos(chief.i),
        dex=deputy.e_x - chief.e_x,
        dey=deputy.e_y - chief.e_y,
        dix=deputy.i - chief.i,
        diy=d_raan * math.sin(chief.i),
    )


def elements_from_roe(roe: RoeVector, chief: OrbitalElements) -> OrbitalElements:
    """Exact inverse of roe_from_elements for small relative elements."""
    d_raan = roe.diy / math.sin(chief.i)
    return OrbitalElements(
        a=chief.a * (1.0 + roe.da),
        theta=chief.theta + roe.dlambda - d_raan * math.cos(chief.i),
        e_x=chief.e_x + roe.dex,
        e_y=chief.e_y + roe.dey,
        i=chief.i + roe.dix,
        raan=chief.raan + d_raan,
    )


def dimensionalize(roe: RoeVector, chief: ChiefOrbit) -> DimRoeState:
    """Scale dimensionless relative elements to meters, y = a_chief * roe."""
    return DimRoeState(chief.a * roe.as_array())


def undimensionalize(state: DimRoeState, chief: ChiefOrbit) -> RoeVector:
    """Inverse of dimensionalize."""
    return RoeVector.from_array(state.as_array() / chief.a)
