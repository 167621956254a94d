import numpy as np
import pytest

from src.wpdiff.domain.model import GridSpec, InvalidSpec, PacketSpec1D, PotentialSpec
from src.wpdiff.physics import evolve_dirac as dirac
from src.wpdiff.physics import evolve_schrodinger as schrodinger
from src.wpdiff.physics.stationary1d import dirac_packet_quadrature
from tests.utils import grid_from_dx

FREE = PotentialSpec(kind="square", v0=0.0, w=1.0)


def _mean_position(field):
    density = np.abs(field.U) ** 2 + np.abs(field.V) ** 2
    return float(np.sum(field.x * density) / np.sum(density))


def _quadrature_scale(packet, grid):
    U0, V0 = dirac_packet_quadrature(packet, None, grid.x, 0.0, check_convergence=False)
    return np.sqrt(np.sum(np.abs(U0) ** 2 + np.abs(V0) ** 2) * grid.dx)


class TestFreeDirac:
    def test_matches_quadrature(self):
        packet = PacketSpec1D(sigma=2.0, q0=0.5, x0=0.0, mass=1.0)
        grid = grid_from_dx(-20.0, 20.0, 0.01, dt=0.005, t_final=1.0)
        field = dirac.init_dirac_gaussian(grid, packet)
        final = dirac.evolve(field, FREE, 1.0).final

        scale = _quadrature_scale(packet, grid)
        U, V = dirac_packet_quadrature(packet, None, grid.x, final.t)
        assert np.max(np.abs(final.U - U / scale)) < 1e-4
        assert np.max(np.abs(final.V - V / scale)) < 1e-4

    def test_heavy_packet_follows_schrodinger(self):
        packet = PacketSpec1D(sigma=0.5, q0=0.4, x0=0.0, mass=40.0)
        t = 25.0
        grid = grid_from_dx(-10.0, 10.0, 0.05, dt=0.0025, t_final=t)
        dirac.check_domain(grid, packet, FREE, t)

        spinor = dirac.evolve(dirac.init_dirac_gaussian(grid, packet), FREE, t).final
        scalar = schrodinger.evolve(schrodinger.init_gaussian(grid, packet), FREE, t).final
        reference = np.abs(scalar.psi)
        assert np.max(np.abs(np.abs(spinor.U) - reference)) < 1e-2 * np.max(reference)

    def test_mirrored_packet_evolves_to_mirror_image(self):
        well = PotentialSpec(kind="square", v0=-0.5, w=1.0)
        grid = grid_from_dx(-15.0, 15.0, 0.02, dt=0.01)
        right = PacketSpec1D(sigma=1.0, q0=1.0, x0=0.0, mass=1.0)
        left = PacketSpec1D(sigma=1.0, q0=-1.0, x0=0.0, mass=1.0)

        a = dirac.evolve(dirac.init_dirac_gaussian(grid, right), well, 2.0).final
        b = dirac.evolve(dirac.init_dirac_gaussian(grid, left), well, 2.0).final
        scale = np.max(np.abs(a.U))
        assert np.max(np.abs(np.abs(a.U) - np.abs(b.U[::-1]))) < 1e-10 * scale
        assert np.max(np.abs(np.abs(a.V) - np.abs(b.V[::-1]))) < 1e-10 * scale

    def test_moves_at_group_velocity(self):
        packet = PacketSpec1D(sigma=6.0, q0=1.0, x0=-5.0, mass=1.0)
        grid = grid_from_dx(-60.0, 60.0, 0.02, dt=0.02)
        dirac.check_domain(grid, packet, FREE, 10.0)
        evolution = dirac.evolve(
            dirac.init_dirac_gaussian(grid, packet),
            FREE,
            10.0,
            probe=_mean_position,
            probe_times=(0.0, 10.0),
        )
        (t0, start), (t1, end) = evolution.probe_series
        assert (end - start) / (t1 - t0) == pytest.approx(1.0 / np.sqrt(2.0), rel=5e-3)


class TestDiracWithWell:
    def test_density_conserved(self):
        packet = PacketSpec1D(sigma=1.0, q0=1.0, x0=-10.0, mass=1.0)
        well = PotentialSpec(kind="square", v0=-1.0, w=1.0)
        grid = grid_from_dx(-30.0, 30.0, 0.02, dt=0.01)
        evolution = dirac.evolve(dirac.init_dirac_gaussian(grid, packet), well, 2.0)
        assert evolution.norm_series[0][1] == pytest.approx(1.0, abs=1e-12)
        assert evolution.max_norm_drift < 1e-9

    def test_matches_quadrature_in_backward_region(self):
        packet = PacketSpec1D(sigma=2.0, q0=1.0, x0=-15.0, mass=1.0)
        well = PotentialSpec(kind="square", v0=-1.0, w=1.0)
        t = 10.0
        grid = grid_from_dx(-40.0, 40.0, 0.01, dt=0.01, t_final=t)
        dirac.check_domain(grid, packet, well, t)
        final = dirac.evolve(dirac.init_dirac_gaussian(grid, packet), well, t).final

        backward = grid.x < -well.w
        scale = _quadrature_scale(packet, grid)
        U, _ = dirac_packet_quadrature(packet, well, grid.x[backward], t)
        reference = np.abs(U / scale)
        assert np.max(np.abs(np.abs(final.U[backward]) - reference)) < 1e-2 * np.max(reference)


class TestGuards:
    def test_default_dt_resolves_mass_phase(self):
        grid = GridSpec(xmin=-1.0, xmax=1.0, nx=11)
        well = PotentialSpec(kind="square", v0=-3.0, w=0.5)
        assert dirac.resolve_dt(grid, 2.0, well) == pytest.approx(0.1 / 5.0)

    def test_explicit_dt_too_large(self):
        grid = GridSpec(xmin=-1.0, xmax=1.0, nx=11, dt=0.1)
        with pytest.raises(InvalidSpec):
            dirac.resolve_dt(grid, 2.0, FREE)

    def test_bandwidth(self):
        grid = grid_from_dx(-20.0, 20.0, 0.5)
        with pytest.raises(InvalidSpec):
            dirac.check_bandwidth(grid, PacketSpec1D(sigma=0.5, q0=1.0, x0=0.0, mass=1.0))

    def test_domain(self):
        grid = grid_from_dx(-10.0, 10.0, 0.05)
        with pytest.raises(InvalidSpec):
            dirac.check_domain(grid, PacketSpec1D(sigma=1.0, q0=1.0, x0=0.0, mass=1.0), FREE, 20.0)
