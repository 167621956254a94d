import unittest

import numpy as np
import pytest

from src.wpdiff.domain.model import InvalidSpec, PacketSpec1D, PotentialSpec
from src.wpdiff.physics import evolve_schrodinger as schrodinger
from src.wpdiff.physics.stationary1d import packet_backward_quadrature, packet_normalization
from tests.utils import free_gaussian, grid_from_dx

FREE = PotentialSpec(kind="square", v0=0.0, w=1.0)


def _max_error(packet, dx, dt, t):
    grid = grid_from_dx(-10.0, 10.0, dx, dt=dt, t_final=t)
    field = schrodinger.init_gaussian(grid, packet)
    final = schrodinger.evolve(field, FREE, t).final
    return np.max(np.abs(final.psi - free_gaussian(packet, grid.x, final.t)))


def _mean_position(x, density):
    return float(np.sum(x * density) / np.sum(density))


class TestFreeEvolution(unittest.TestCase):
    def setUp(self):
        self.packet = PacketSpec1D(sigma=1.0, q0=0.5, x0=0.0, mass=1.0)

    def test_matches_closed_form(self):
        assert _max_error(self.packet, dx=0.01, dt=1e-4, t=0.02) < 1e-6

    def test_second_order_refinement(self):
        coarse = _max_error(self.packet, dx=0.1, dt=0.05, t=2.0)
        fine = _max_error(self.packet, dx=0.05, dt=0.025, t=2.0)
        assert coarse / fine > 3.5

    def test_backward_steps_restore_field(self):
        grid = grid_from_dx(-10.0, 10.0, 0.05, dt=0.01)
        well = PotentialSpec(kind="square", v0=-1.0, w=1.0)
        field = schrodinger.init_gaussian(grid, self.packet)
        current = field
        for _ in range(50):
            current = schrodinger.step(current, well)
        assert np.max(np.abs(current.psi - field.psi)) > 1e-3
        for _ in range(50):
            current = schrodinger.step(current, well, dt=-0.01)
        np.testing.assert_allclose(current.psi, field.psi, atol=1e-10)
        assert current.t == pytest.approx(0.0, abs=1e-12)

    def test_initial_moments(self):
        packet = PacketSpec1D(sigma=1.0, q0=0.5, x0=0.3, mass=1.0)
        grid = grid_from_dx(-10.0, 10.0, 0.01)
        field = schrodinger.init_gaussian(grid, packet)
        assert _mean_position(field.x, np.abs(field.psi) ** 2) == pytest.approx(0.3, abs=1e-8)
        momentum = np.sum(np.conj(field.psi) * -1j * np.gradient(field.psi, grid.dx)) * grid.dx
        assert momentum.real == pytest.approx(0.5, abs=1e-4)
        assert abs(momentum.imag) < 1e-8

    def test_mean_position_moves_with_q0_over_m(self):
        packet = PacketSpec1D(sigma=1.0, q0=1.0, x0=-5.0, mass=2.0)
        grid = grid_from_dx(-20.0, 20.0, 0.02, dt=0.01)
        field = schrodinger.init_gaussian(grid, packet)
        times = (0.0, 2.0, 4.0, 6.0)
        evolution = schrodinger.evolve(
            field,
            FREE,
            6.0,
            probe=lambda f: _mean_position(f.x, np.abs(f.psi) ** 2),
            probe_times=times,
        )
        for t, mean in evolution.probe_series:
            assert mean == pytest.approx(-5.0 + 0.5 * t, abs=2e-3)


class TestWithWell(unittest.TestCase):
    def setUp(self):
        self.packet = PacketSpec1D(sigma=1.0, q0=1.0, x0=-15.0, mass=1.0)
        self.well = PotentialSpec(kind="square", v0=-1.0, w=1.0)

    def test_norm_conserved(self):
        grid = grid_from_dx(-40.0, 40.0, 0.02, dt=0.01, t_final=5.0)
        field = schrodinger.init_gaussian(grid, self.packet)
        evolution = schrodinger.evolve(field, self.well, 5.0)
        assert evolution.steps == 500
        assert evolution.max_norm_drift < 1e-9

    def test_matches_momentum_oracle(self):
        t = 10.0
        grid = grid_from_dx(-40.0, 40.0, 0.01, dt=0.005, t_final=t)
        schrodinger.check_domain(grid, self.packet, self.well, t)
        field = schrodinger.init_gaussian(grid, self.packet)
        final = schrodinger.evolve(field, self.well, t).final

        backward = grid.x < -self.well.w
        oracle = packet_backward_quadrature(
            self.packet, self.well, grid.x[backward], t
        ) * packet_normalization(self.packet)
        assert np.max(np.abs(final.psi[backward] - oracle)) < 1e-3

    def test_snapshots_and_probe(self):
        grid = grid_from_dx(-40.0, 40.0, 0.05, dt=0.05, t_final=2.0)
        field = schrodinger.init_gaussian(grid, self.packet)
        evolution = schrodinger.evolve(
            field,
            self.well,
            2.0,
            snapshot_times=(1.0,),
            probe=lambda f: schrodinger.probability_in(f, -40.0, 0.0),
            probe_times=(0.0, 1.0, 2.0),
        )
        assert evolution.snapshots[1.0].t == pytest.approx(1.0)
        assert [t for t, _ in evolution.probe_series] == [0.0, 1.0, 2.0]
        assert evolution.probe_series[0][1] == pytest.approx(1.0, abs=1e-9)


class TestGuards:
    def test_support_outside_grid(self):
        grid = grid_from_dx(-5.0, 5.0, 0.05)
        with pytest.raises(InvalidSpec):
            schrodinger.init_gaussian(grid, PacketSpec1D(sigma=1.0, q0=0.0, x0=-2.0, mass=1.0))

    def test_domain_too_small(self):
        grid = grid_from_dx(-10.0, 10.0, 0.05)
        packet = PacketSpec1D(sigma=1.0, q0=1.0, x0=0.0, mass=1.0)
        with pytest.raises(InvalidSpec):
            schrodinger.check_domain(grid, packet, FREE, t_final=50.0)

    def test_interval_probability_bounds(self):
        x = np.linspace(0.0, 1.0, 11)
        assert schrodinger.interval_probability(x, np.ones(11), 0.25, 0.75) == pytest.approx(0.5)
        with pytest.raises(ValueError):
            schrodinger.interval_probability(x, np.ones(11), 0.5, 0.5)
        with pytest.raises(ValueError):
            schrodinger.interval_probability(x, np.ones(11), -1.0, 0.5)

    def test_default_dt(self):
        grid = grid_from_dx(-1.0, 1.0, 0.1)
        assert schrodinger.resolve_dt(grid, 2.0) == pytest.approx(2.0 * 0.01)
