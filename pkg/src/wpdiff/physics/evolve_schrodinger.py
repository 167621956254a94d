"""
Crank-Nicolson (Cayley) evolution of the 1D Schrödinger equation,
H = -(1/2m) d^2/dx^2 + V(x), with hard walls just outside the grid.
"""

import math
from dataclasses import dataclass, replace
from functools import lru_cache
from typing import Callable, Optional, Sequence

import numpy as np
from numpy.typing import NDArray
from scipy import special

from src.wpdiff.domain.model import GridSpec, InvalidSpec, PacketSpec1D, PotentialSpec
from src.wpdiff.physics.evolution import Evolution, run_steps
from src.wpdiff.physics.specfun import TridiagonalSystem, solve_tridiagonal
from src.wpdiff.physics.stationary1d import free_packet

SUPPORT_WIDTHS = 6.0


@dataclass(frozen=True)
class WaveField1D:
    grid: GridSpec
    psi: NDArray[np.complex128]
    t: float
    mass: float

    def __post_init__(self):
        if len(self.psi) != self.grid.nx:
            raise ValueError("psi length must equal grid.nx")

    @property
    def x(self) -> NDArray[np.float64]:
        return self.grid.x


def resolve_dt(grid: GridSpec, mass: float) -> float:
    """grid.dt when given, otherwise m dx^2."""
    return grid.dt if grid.dt is not None else mass * grid.dx**2


def spread_width(packet: PacketSpec1D, t: float) -> float:
    """Standard deviation of |psi|^2 for the free Gaussian at time t."""
    tau = t / (2 * packet.mass * packet.sigma**2)
    return packet.sigma * math.sqrt(1 + tau**2)


def escaped_probability(packet: PacketSpec1D, grid: GridSpec, t: float, mirrored: bool) -> float:
    """Free-packet probability outside [xmin, xmax] at t, optionally for its mirror image about 0."""
    center = packet.x0 + packet.velocity * t
    if mirrored:
        center = -center
    s = spread_width(packet, t) * math.sqrt(2)
    return float(
        0.5 * special.erfc((grid.xmax - center) / s)
        + 0.5 * special.erfc((center - grid.xmin) / s)
    )


def check_domain(grid: GridSpec, packet: PacketSpec1D, pot: PotentialSpec, t_final: float) -> None:
    """
    Rejects grids whose walls would reflect more than grid.boundary_tolerance
    of the probability by t_final. The reflected wave is approximated by the
    mirror image of the free packet.
    """
    escaped = escaped_probability(packet, grid, t_final, mirrored=False)
    if pot.v0 != 0:
        escaped = max(escaped, escaped_probability(packet, grid, t_final, mirrored=True))
    if escaped > grid.boundary_tolerance:
        raise InvalidSpec(
            f"domain [{grid.xmin}, {grid.xmax}] too small: {escaped:.2e} of the "
            f"packet reaches the walls by t={t_final}"
        )


def init_gaussian(grid: GridSpec, packet: PacketSpec1D) -> WaveField1D:
    """
    Gaussian exp(i q0 (x - x0) - (x - x0)^2 / 4 sigma^2) normalized on the grid.

    Raises:
        InvalidSpec: if x0 +- 6 sigma leaves the grid.
    """
    lo = packet.x0 - SUPPORT_WIDTHS * packet.sigma
    hi = packet.x0 + SUPPORT_WIDTHS * packet.sigma
    if lo < grid.xmin or hi > grid.xmax:
        raise InvalidSpec(
            f"packet support [{lo}, {hi}] outside grid [{grid.xmin}, {grid.xmax}]"
        )
    psi = free_packet(packet, grid.x, 0.0, normalized=True)
    psi = psi / math.sqrt(np.sum(np.abs(psi) ** 2) * grid.dx)
    return WaveField1D(grid=grid, psi=psi, t=0.0, mass=packet.mass)


def norm(field: WaveField1D) -> float:
    return float(np.sum(np.abs(field.psi) ** 2) * field.grid.dx)


def probability_in(field: WaveField1D, a: float, b: float) -> float:
    return interval_probability(field.x, np.abs(field.psi) ** 2, a, b)


def interval_probability(x: NDArray, density: NDArray, a: float, b: float) -> float:
    """Trapezoid integral of density over [a, b], interpolating at the ends."""
    if not a < b:
        raise ValueError(f"interval [{a}, {b}] is empty or reversed")
    if a < x[0] or b > x[-1]:
        raise ValueError(f"interval [{a}, {b}] outside the grid")
    inside = (x > a) & (x < b)
    xs = np.concatenate(([a], x[inside], [b]))
    ys = np.concatenate(
        ([np.interp(a, x, density)], density[inside], [np.interp(b, x, density)])
    )
    return float(np.trapezoid(ys, xs))


class CayleyPropagator:
    """(1 + i H dt/2) psi' = (1 - i H dt/2) psi for a fixed grid, potential and dt."""

    def __init__(self, grid: GridSpec, pot: PotentialSpec, mass: float, dt: float):
        a = 1.0 / (2 * mass * grid.dx**2)
        self.dt = dt
        self.h_diag = 2 * a + pot.sample(grid.x, grid.dx)
        self.h_off = -a
        half = 0.5j * dt
        n = grid.nx
        self.lower = np.full(n - 1, half * self.h_off, dtype=np.complex128)
        self.upper = self.lower.copy()
        self.diag = 1.0 + half * self.h_diag

    def hamiltonian(self, psi: NDArray) -> NDArray:
        out = self.h_diag * psi
        out[:-1] += self.h_off * psi[1:]
        out[1:] += self.h_off * psi[:-1]
        return out

    def advance(self, psi: NDArray) -> NDArray:
        rhs = psi - 0.5j * self.dt * self.hamiltonian(psi)
        return solve_tridiagonal(TridiagonalSystem(self.lower, self.diag, self.upper, rhs))


@lru_cache(maxsize=8)
def propagator(grid: GridSpec, pot: PotentialSpec, mass: float, dt: float) -> CayleyPropagator:
    return CayleyPropagator(grid, pot, mass, dt)


def step(field: WaveField1D, pot: PotentialSpec, dt: Optional[float] = None) -> WaveField1D:
    """One implicit step; a negative dt runs the scheme backwards."""
    dt = resolve_dt(field.grid, field.mass) if dt is None else dt
    psi = propagator(field.grid, pot, field.mass, dt).advance(field.psi)
    return replace(field, psi=psi, t=field.t + dt)


def evolve(
    field: WaveField1D,
    pot: PotentialSpec,
    until: float,
    snapshot_times: Sequence[float] = (),
    probe: Optional[Callable[[WaveField1D], float]] = None,
    probe_times: Sequence[float] = (),
) -> Evolution[WaveField1D]:
    dt = resolve_dt(field.grid, field.mass)
    prop = propagator(field.grid, pot, field.mass, dt)

    def advance(current: WaveField1D) -> WaveField1D:
        return replace(current, psi=prop.advance(current.psi), t=current.t + dt)

    return run_steps(
        field,
        advance,
        norm,
        dt,
        until,
        snapshot_times=snapshot_times,
        probe=probe,
        probe_times=probe_times,
    )
