from dataclasses import dataclass, field
from typing import Dict, List, Literal, Optional, Tuple, Union

import numpy as np
from numpy.typing import NDArray
from pydantic import Field, model_validator

from src.wpdiff.domain.model import GridSpec, PacketSpec1D, PacketSpec3D, PotentialSpec, Spec

RunMode = Literal["schrodinger1d", "dirac1d", "analytic1d", "analytic3d", "experiment"]
Units = Literal["natural", "nuclear", "laboratory"]

HEIGHT_FRACTION = 0.05
VALLEY_FRACTION = 0.8
PEAK_WINDOW = 3


################################################################################
# Run configuration - parsed from config files and presets
################################################################################


class RunOptions(Spec):
    mode: RunMode
    units: Units = "natural"
    nk: int = Field(default=64, ge=64)
    plane: Literal["xy", "xz"] = "xy"
    plane_offset: float = 0.0
    label: str = "profile"
    # analytic1d: evaluate the long-time closed form instead of the exact pattern
    long_time: bool = True


class DetectorSpec(Spec):
    position: float
    width: float = Field(gt=0)
    interval: float = Field(gt=0)
    particle_count: float = Field(default=1.0, gt=0)


class ScenarioConfig(Spec):
    run: RunOptions
    packet: Union[PacketSpec1D, PacketSpec3D]
    potential: Optional[PotentialSpec] = None
    grid: GridSpec
    detector: Optional[DetectorSpec] = None
    preset_name: Optional[str] = None
    # defaulted parameters echoed in reports with an assumed= marker
    assumptions: Dict[str, str] = Field(default_factory=dict)

    @model_validator(mode="after")
    def check_mode(self):
        mode = self.run.mode
        if mode == "analytic3d":
            if not isinstance(self.packet, PacketSpec3D):
                raise ValueError("analytic3d needs a 3D packet (q0_vec, r0_vec)")
        elif not isinstance(self.packet, PacketSpec1D):
            raise ValueError(f"{mode} needs a 1D packet (q0, x0)")

        if mode in ("analytic1d", "experiment", "dirac1d") and self.potential is None:
            raise ValueError(f"{mode} needs a potential section")
        if mode == "analytic1d" and self.potential.kind != "square":
            raise ValueError("analytic1d is defined for a square well only")
        if mode == "experiment" and self.detector is None:
            raise ValueError("experiment needs a detector section")
        if mode in ("schrodinger1d", "dirac1d", "experiment") and self.grid.t_final <= 0:
            raise ValueError(f"{mode} needs grid.t_final > 0")
        return self

    @property
    def name(self) -> str:
        return self.preset_name or self.run.mode


################################################################################
# Results
################################################################################


class PeakReport(Spec):
    count: int = Field(ge=0)
    positions: Tuple[float, ...] = ()
    height_fraction: float = HEIGHT_FRACTION
    valley_fraction: float = VALLEY_FRACTION
    window: int = PEAK_WINDOW

    @model_validator(mode="after")
    def check_positions(self):
        if self.count != len(self.positions):
            raise ValueError("count must equal the number of positions")
        if any(b <= a for a, b in zip(self.positions, self.positions[1:])):
            raise ValueError("peak positions must be strictly increasing")
        return self

    @property
    def spacings(self) -> List[float]:
        return [b - a for a, b in zip(self.positions, self.positions[1:])]


class ComparisonMetrics(Spec):
    max_abs: float
    peak_relative: float
    peak_offsets: Tuple[float, ...] = ()
    peaks_a: int = 0
    peaks_b: int = 0


@dataclass(frozen=True)
class ScalarProfile:
    label: str
    t: float
    x: NDArray[np.float64]
    psi: NDArray[np.complex128]


@dataclass(frozen=True)
class SpinorProfile:
    label: str
    t: float
    x: NDArray[np.float64]
    U: NDArray[np.complex128]
    V: NDArray[np.complex128]


@dataclass(frozen=True)
class FieldMap:
    """amplitude[j, i] belongs to (a[i], b[j]) in the chosen plane."""

    label: str
    t: float
    plane: str
    a: NDArray[np.float64]
    b: NDArray[np.float64]
    amplitude: NDArray[np.float64]


Profile = Union[ScalarProfile, SpinorProfile, FieldMap]


@dataclass(frozen=True)
class RunRecord:
    name: str
    # None for presets that only tabulate stationary quantities
    config: Optional[ScenarioConfig]
    profiles: Tuple[Profile, ...] = ()
    norm_series: Tuple[Tuple[float, float], ...] = ()
    detector_series: Tuple[Tuple[float, float], ...] = ()
    peak_report: Optional[PeakReport] = None
    comparison: Optional[ComparisonMetrics] = None
    metrics: Dict[str, Union[float, int, str]] = field(default_factory=dict)
    wall_clock: float = 0.0

    @property
    def max_norm_drift(self) -> float:
        if not self.norm_series:
            return 0.0
        first = self.norm_series[0][1]
        return max(abs(n - first) / first for _, n in self.norm_series)

    def profile(self, label: str) -> Profile:
        for p in self.profiles:
            if p.label == label:
                return p
        raise KeyError(f"no profile labelled '{label}' in {self.name}")
