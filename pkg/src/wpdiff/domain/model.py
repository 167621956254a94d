import math
from typing import Literal, Optional, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

NONRELATIVISTIC_SPEED = 0.1
DIFFRACTIVE_BELOW = 0.5
SINGLE_HUMP_ABOVE = 2.0


class InvalidSpec(ValueError):
    pass


################################################################################
# Packets, potentials, grids
################################################################################


class Spec(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")


class PacketSpec1D(Spec):
    sigma: float = Field(gt=0)
    q0: float
    x0: float
    mass: float = Field(gt=0)

    @property
    def velocity(self) -> float:
        return self.q0 / self.mass

    @property
    def nonrelativistic(self) -> bool:
        return abs(self.velocity) < NONRELATIVISTIC_SPEED


class PacketSpec3D(Spec):
    sigma: float = Field(gt=0)
    q0_vec: Tuple[float, float, float]
    r0_vec: Tuple[float, float, float]
    mass: float = Field(gt=0)

    @property
    def q0(self) -> np.ndarray:
        return np.asarray(self.q0_vec, dtype=float)

    @property
    def r0(self) -> np.ndarray:
        return np.asarray(self.r0_vec, dtype=float)

    @property
    def impact_parameter(self) -> float:
        """Distance of the initial center from the line through the origin along q0."""
        q = self.q0
        norm = np.linalg.norm(q)
        if norm == 0:
            return float(np.linalg.norm(self.r0))
        along = np.dot(self.r0, q) / norm
        return float(np.sqrt(max(np.dot(self.r0, self.r0) - along**2, 0.0)))


class PotentialSpec(Spec):
    """
    Signed potential: v0 < 0 is a well, v0 > 0 a barrier.

    square:   V(x) = v0 for |x| < w, 0 elsewhere (full width 2w)
    gaussian: V(x) = v0 exp(-x^2 / w^2)
    """

    kind: Literal["square", "gaussian"] = "square"
    v0: float
    w: float = Field(gt=0)

    @property
    def max_abs(self) -> float:
        return abs(self.v0)

    def sample(self, x: np.ndarray, dx: Optional[float] = None) -> np.ndarray:
        """
        Potential on grid points. With dx given, a square well is averaged
        over each cell [x - dx/2, x + dx/2] so the edges are resolved below
        one cell.
        """
        x = np.asarray(x, dtype=float)
        if self.kind == "gaussian":
            return self.v0 * np.exp(-(x**2) / self.w**2)

        if dx is None:
            return np.where(np.abs(x) < self.w, self.v0, 0.0)

        overlap = np.clip(
            np.minimum(x + dx / 2, self.w) - np.maximum(x - dx / 2, -self.w), 0.0, dx
        )
        return self.v0 * overlap / dx


class GridSpec(Spec):
    xmin: float
    xmax: float
    nx: int = Field(ge=3)
    dt: Optional[float] = Field(default=None, gt=0)
    t_final: float = Field(default=0.0, ge=0)
    snapshot_times: Tuple[float, ...] = ()
    # only used by field maps
    ymin: Optional[float] = None
    ymax: Optional[float] = None
    ny: Optional[int] = Field(default=None, ge=2)
    boundary_tolerance: float = Field(default=1e-6, gt=0)

    @model_validator(mode="after")
    def check_geometry(self):
        if not self.xmin < self.xmax:
            raise ValueError(f"xmin={self.xmin} must be below xmax={self.xmax}")
        if list(self.snapshot_times) != sorted(self.snapshot_times):
            raise ValueError("snapshot_times must be ordered")
        for t in self.snapshot_times:
            if t < 0 or t > self.t_final:
                raise ValueError(f"snapshot time {t} outside [0, {self.t_final}]")
        if (self.ymin is None) != (self.ymax is None):
            raise ValueError("ymin and ymax must be given together")
        if self.ymin is not None and not self.ymin < self.ymax:
            raise ValueError(f"ymin={self.ymin} must be below ymax={self.ymax}")
        return self

    @property
    def dx(self) -> float:
        return (self.xmax - self.xmin) / (self.nx - 1)

    @property
    def x(self) -> np.ndarray:
        return np.linspace(self.xmin, self.xmax, self.nx)

    def y(self) -> np.ndarray:
        ymin = self.xmin if self.ymin is None else self.ymin
        ymax = self.xmax if self.ymax is None else self.ymax
        return np.linspace(ymin, ymax, self.ny or self.nx)


AnySpec = Union[PacketSpec1D, PacketSpec3D, PotentialSpec, GridSpec]


def validate(spec: AnySpec) -> AnySpec:
    """
    Re-checks every invariant of a spec and returns a fresh validated copy.

    Raises:
        InvalidSpec: with the pydantic error summary.
    """
    try:
        return type(spec).model_validate(spec.model_dump())
    except ValidationError as e:
        raise InvalidSpec(f"invalid {type(spec).__name__}: {e}")


def narrowness_ratio(packet: PacketSpec1D, pot: PotentialSpec) -> float:
    """sigma * sqrt(q0 / w); small values give a multi-peak reflected pattern."""
    if packet.q0 <= 0:
        raise InvalidSpec("narrowness is only defined for q0 > 0")
    return packet.sigma * math.sqrt(packet.q0 / pot.w)


def narrowness_class(packet: PacketSpec1D, pot: PotentialSpec) -> str:
    ratio = narrowness_ratio(packet, pot)
    if ratio <= DIFFRACTIVE_BELOW:
        return "diffractive"
    if ratio >= SINGLE_HUMP_ABOVE:
        return "single-hump"
    return "marginal"


################################################################################
# Units
################################################################################

HBAR_SI = 1.054571817e-34  # J s
C_SI = 299792458.0  # m / s
ELEMENTARY_CHARGE = 1.602176634e-19  # C
AMU_KG = 1.66053906660e-27
HBAR_C_MEV_FM = 197.3269804
AMU_MEV = 931.49410242


class UnitSystem(Spec):
    """
    A natural-unit frame with hbar = 1. The nuclear frame also sets c = 1 and
    measures lengths in fm; the laboratory frame keeps centimetres and
    seconds. `scale[unit]` is the value of one `unit` in the frame.
    """

    name: str
    hbar_SI: float = HBAR_SI
    c_SI: float = C_SI
    scale: dict[str, float]

    def to_natural(self, value: float, unit: str) -> float:
        return value * self._factor(unit)

    def from_natural(self, value: float, unit: str) -> float:
        return value / self._factor(unit)

    def _factor(self, unit: str) -> float:
        try:
            return self.scale[unit]
        except KeyError:
            raise InvalidSpec(
                f"unknown unit '{unit}' for {self.name} units; known: {sorted(self.scale)}"
            )


_FM_PER_M = 1e15
_EV_PER_FM_INV = HBAR_C_MEV_FM * 1e6

NUCLEAR = UnitSystem(
    name="nuclear",
    scale={
        "fm": 1.0,
        "m": _FM_PER_M,
        "cm": 1e13,
        "mm": 1e12,
        "s": C_SI * _FM_PER_M,
        "MeV": 1.0 / HBAR_C_MEV_FM,
        "eV": 1.0 / _EV_PER_FM_INV,
        "amu": AMU_MEV / HBAR_C_MEV_FM,
        "1/fm": 1.0,
    },
)

# hbar = 1 with lengths in cm and times in s: energies become 1/s and masses s/cm^2
LABORATORY = UnitSystem(
    name="laboratory",
    scale={
        "cm": 1.0,
        "mm": 0.1,
        "m": 100.0,
        "fm": 1e-13,
        "s": 1.0,
        "eV": ELEMENTARY_CHARGE / HBAR_SI,
        "MeV": 1e6 * ELEMENTARY_CHARGE / HBAR_SI,
        "amu": AMU_KG / HBAR_SI * 1e-4,
        "kg": 1e-4 / HBAR_SI,
        "1/cm": 1.0,
    },
)

UNIT_SYSTEMS = {"nuclear": NUCLEAR, "laboratory": LABORATORY}


def to_natural(value: float, unit: str, units: UnitSystem = NUCLEAR) -> float:
    return units.to_natural(value, unit)


def from_natural(value: float, unit: str, units: UnitSystem = NUCLEAR) -> float:
    return units.from_natural(value, unit)
