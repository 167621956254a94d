"""
Crank-Nicolson evolution of the 1D Dirac equation with a scalar potential.

The spinor (U, V) evolves with the real symmetric discrete Hamiltonian

    H = [[ M, -D ],
         [ D, -M ]],   M = m + S(x),

where D is the centered first difference. This is the representation in
which the plane wave (1, ik/(E+m)) e^{ikx} is an eigenstate with energy
E = sqrt(k^2 + m^2), unitarily equivalent to gamma0 = sigma_z,
gamma1 = sigma_z sigma_x. Unknowns are interleaved [U0, V0, U1, V1, ...] so
one step is a single banded solve with three bands on each side.
"""

import math
from dataclasses import dataclass, replace
from functools import lru_cache
from typing import Callable, Optional, Sequence

import numpy as np
from numpy.typing import NDArray

from src.wpdiff.domain.model import GridSpec, InvalidSpec, PacketSpec1D, PotentialSpec
from src.wpdiff.physics.evolution import Evolution, run_steps
from src.wpdiff.physics.evolve_schrodinger import SUPPORT_WIDTHS, interval_probability
from src.wpdiff.physics.specfun import BlockTridiagonalSystem, solve_banded_matrix
from src.wpdiff.physics.stationary1d import dirac_packet_quadrature

MASS_PHASE_LIMIT = 0.1
INIT_NK = 64


@dataclass(frozen=True)
class SpinorField1D:
    grid: GridSpec
    U: NDArray[np.complex128]
    V: NDArray[np.complex128]
    t: float
    mass: float

    def __post_init__(self):
        if len(self.U) != self.grid.nx or len(self.V) != self.grid.nx:
            raise ValueError("spinor components must have length grid.nx")

    @property
    def x(self) -> NDArray[np.float64]:
        return self.grid.x


def resolve_dt(grid: GridSpec, mass: float, pot: PotentialSpec) -> float:
    """
    grid.dt when given, otherwise the largest step with (m + max|S|) dt <= 0.1.

    Raises:
        InvalidSpec: if an explicit dt under-resolves the mass oscillation.
    """
    scale = mass + pot.max_abs
    if grid.dt is None:
        return MASS_PHASE_LIMIT / scale
    if grid.dt * scale > MASS_PHASE_LIMIT * (1 + 1e-12):
        raise InvalidSpec(
            f"dt={grid.dt} too large: (m + max|S|) dt = {grid.dt * scale:.3g} > {MASS_PHASE_LIMIT}"
        )
    return grid.dt


def check_bandwidth(grid: GridSpec, packet: PacketSpec1D) -> None:
    """The packet must stay in the lower quarter of the Brillouin zone, away from the doubler branch."""
    k_top = abs(packet.q0) + 6 / (2 * packet.sigma)
    limit = math.pi / grid.dx / 4
    if k_top >= limit:
        raise InvalidSpec(
            f"packet momenta up to {k_top:.3g} exceed pi/(4 dx) = {limit:.3g}; refine dx"
        )


def check_domain(grid: GridSpec, packet: PacketSpec1D, pot: PotentialSpec, t_final: float) -> None:
    """Group-velocity cone of the packet (and its mirror image about the well) must fit in the grid."""
    k_top = abs(packet.q0) + 3 / packet.sigma
    v_max = k_top / math.hypot(k_top, packet.mass)
    reach = SUPPORT_WIDTHS * packet.sigma + v_max * t_final
    lo, hi = packet.x0 - reach, packet.x0 + reach
    if pot.v0 != 0:
        lo, hi = min(lo, -hi), max(hi, -lo)
    if lo < grid.xmin or hi > grid.xmax:
        raise InvalidSpec(
            f"domain [{grid.xmin}, {grid.xmax}] does not contain [{lo:.4g}, {hi:.4g}] "
            f"reached by t={t_final}"
        )


def init_dirac_gaussian(grid: GridSpec, packet: PacketSpec1D, nk: int = INIT_NK) -> SpinorField1D:
    """
    Minimal-uncertainty relativistic packet sampled by momentum quadrature
    within 12 sigma + 35/m of x0 (zero beyond), normalized to unit density.
    """
    lo = packet.x0 - SUPPORT_WIDTHS * packet.sigma
    hi = packet.x0 + SUPPORT_WIDTHS * packet.sigma
    if lo < grid.xmin or hi > grid.xmax:
        raise InvalidSpec(
            f"packet support [{lo}, {hi}] outside grid [{grid.xmin}, {grid.xmax}]"
        )
    check_bandwidth(grid, packet)

    x = grid.x
    window = np.abs(x - packet.x0) <= 12 * packet.sigma + 35 / packet.mass
    U = np.zeros(grid.nx, dtype=np.complex128)
    V = np.zeros(grid.nx, dtype=np.complex128)
    U[window], V[window] = dirac_packet_quadrature(
        packet, None, x[window], 0.0, nk=nk, check_convergence=False
    )

    scale = math.sqrt(np.sum(np.abs(U) ** 2 + np.abs(V) ** 2) * grid.dx)
    return SpinorField1D(grid=grid, U=U / scale, V=V / scale, t=0.0, mass=packet.mass)


def density(field: SpinorField1D) -> float:
    return float(np.sum(np.abs(field.U) ** 2 + np.abs(field.V) ** 2) * field.grid.dx)


def probability_in(field: SpinorField1D, a: float, b: float) -> float:
    return interval_probability(field.x, np.abs(field.U) ** 2 + np.abs(field.V) ** 2, a, b)


class DiracPropagator:
    def __init__(self, grid: GridSpec, pot: PotentialSpec, mass: float, dt: float):
        n = grid.nx
        self.dt = dt
        self.M = mass + pot.sample(grid.x, grid.dx)
        self.c = 1.0 / (2 * grid.dx)

        half = 0.5j * dt
        diag = np.zeros((n, 2, 2), dtype=np.complex128)
        diag[:, 0, 0] = 1 + half * self.M
        diag[:, 1, 1] = 1 - half * self.M
        upper = np.zeros((n - 1, 2, 2), dtype=np.complex128)
        upper[:, 0, 1] = -half * self.c
        upper[:, 1, 0] = half * self.c
        lower = np.zeros((n - 1, 2, 2), dtype=np.complex128)
        lower[:, 0, 1] = half * self.c
        lower[:, 1, 0] = -half * self.c
        self.ab = BlockTridiagonalSystem(
            lower, diag, upper, np.zeros(2 * n, dtype=np.complex128)
        ).banded()

    def _difference(self, f: NDArray) -> NDArray:
        out = np.zeros_like(f)
        out[1:-1] = f[2:] - f[:-2]
        out[0] = f[1]
        out[-1] = -f[-2]
        return self.c * out

    def hamiltonian(self, U: NDArray, V: NDArray) -> tuple[NDArray, NDArray]:
        return self.M * U - self._difference(V), self._difference(U) - self.M * V

    def advance(self, U: NDArray, V: NDArray) -> tuple[NDArray, NDArray]:
        HU, HV = self.hamiltonian(U, V)
        rhs = np.empty(2 * len(U), dtype=np.complex128)
        rhs[0::2] = U - 0.5j * self.dt * HU
        rhs[1::2] = V - 0.5j * self.dt * HV
        sol = solve_banded_matrix((3, 3), self.ab, rhs)
        return sol[0::2], sol[1::2]


@lru_cache(maxsize=8)
def propagator(grid: GridSpec, pot: PotentialSpec, mass: float, dt: float) -> DiracPropagator:
    return DiracPropagator(grid, pot, mass, dt)


def step(field: SpinorField1D, scalar_pot: PotentialSpec, dt: Optional[float] = None) -> SpinorField1D:
    dt = resolve_dt(field.grid, field.mass, scalar_pot) if dt is None else dt
    U, V = propagator(field.grid, scalar_pot, field.mass, dt).advance(field.U, field.V)
    return replace(field, U=U, V=V, t=field.t + dt)


def evolve(
    field: SpinorField1D,
    scalar_pot: PotentialSpec,
    until: float,
    snapshot_times: Sequence[float] = (),
    probe: Optional[Callable[[SpinorField1D], float]] = None,
    probe_times: Sequence[float] = (),
) -> Evolution[SpinorField1D]:
    dt = resolve_dt(field.grid, field.mass, scalar_pot)
    prop = propagator(field.grid, scalar_pot, field.mass, dt)

    def advance(current: SpinorField1D) -> SpinorField1D:
        U, V = prop.advance(current.U, current.V)
        return replace(current, U=U, V=V, t=current.t + dt)

    return run_steps(
        field,
        advance,
        density,
        dt,
        until,
        snapshot_times=snapshot_times,
        probe=probe,
        probe_times=probe_times,
    )
