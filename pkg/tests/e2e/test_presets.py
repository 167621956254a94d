import pytest

from src.wpdiff.domain.model import GridSpec, PacketSpec1D, PotentialSpec
from src.wpdiff.domain.scenario_model import DetectorSpec, RunOptions, ScenarioConfig
from src.wpdiff.service_layer import scenarios

pytestmark = pytest.mark.slow


@pytest.mark.parametrize("name", ["fig4", "fig6"])
def test_narrow_packet_shows_fringes(name):
    record = scenarios.run_preset(name)
    assert record.peak_report.count >= 4
    assert record.metrics["narrowness_class"] == "diffractive"
    assert record.max_norm_drift < 1e-8


@pytest.mark.parametrize("name", ["fig5", "fig7"])
def test_wide_packet_has_no_fringes(name):
    record = scenarios.run_preset(name)
    assert record.peak_report.count <= 2
    assert record.max_norm_drift < 1e-8


def test_helium_drop():
    record = scenarios.run_preset("fig10")
    grid = record.config.grid
    assert len(record.detector_series) == int(grid.t_final / record.config.detector.interval) + 1
    assert record.metrics["max_norm_drift"] < 1e-8
    assert record.metrics["transmitted_fraction"] < 1e-12
    assert record.metrics["stationary_transmission_estimate"] < 1e-12
    assert record.metrics["assumed.packet.q0"].startswith("0 ")
    assert record.metrics["assumed.potential.w"].startswith("0.5 cm")


def test_weak_plate_transmission_matches_stationary_estimate():
    # the 4 eV plate of fig10 transmits nothing measurable; 1e-4 eV lets both sides be compared
    packet = PacketSpec1D(sigma=0.5, q0=0.0, x0=-3.5, mass=6302.6)
    plate = PotentialSpec(kind="square", v0=1e-4, w=0.5)
    config = ScenarioConfig(
        run=RunOptions(mode="experiment"),
        packet=packet,
        potential=plate,
        grid=GridSpec(xmin=-85.0, xmax=85.0, nx=8501, dt=10.0, t_final=1e5),
        detector=DetectorSpec(position=-5.5, width=0.1, interval=1000.0),
    )
    record = scenarios.run_config(config)
    estimate = record.metrics["stationary_transmission_estimate"]
    assert 0.05 < estimate < 0.5
    assert estimate / 2 < record.metrics["transmitted_fraction"] < estimate * 2
