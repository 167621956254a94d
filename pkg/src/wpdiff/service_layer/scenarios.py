"""
Figure presets and the run pipelines behind every CLI mode.

Each pipeline takes a validated ScenarioConfig, converts it to natural
units, runs the physics and returns an immutable RunRecord. Nothing here
touches the filesystem; exporting is the exporter adapter's job.
"""

import hashlib
import itertools
import json
import math
import time
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np
from loguru import logger

from src.wpdiff.domain import peaks
from src.wpdiff.domain.model import (
    HBAR_C_MEV_FM,
    UNIT_SYSTEMS,
    GridSpec,
    PacketSpec1D,
    PacketSpec3D,
    PotentialSpec,
    narrowness_class,
    narrowness_ratio,
)
from src.wpdiff.domain.scenario_model import (
    DetectorSpec,
    FieldMap,
    RunOptions,
    RunRecord,
    ScalarProfile,
    ScenarioConfig,
    SpinorProfile,
)
from src.wpdiff.physics import asymptotic1d, evolve_dirac, evolve_schrodinger, scatter3d
from src.wpdiff.physics.specfun import composite_gauss_nodes
from src.wpdiff.physics.stationary1d import (
    packet_backward_quadrature,
    schrodinger_reflection,
    schrodinger_transmission,
)

FREE_SPACE = PotentialSpec(kind="square", v0=0.0, w=1.0)

# (mass unit, energy unit) of each input unit system
INPUT_UNITS = {"laboratory": ("amu", "eV"), "nuclear": ("MeV", "MeV")}

FIG1_OUTER_CUTOFF = 600.0
FIG1_REFLECTION_TOLERANCE = 0.05
NEUTRON_MASS_MEV = 939.565
HELIUM4_MASS_AMU = 4.002602


################################################################################
# Units and defaults
################################################################################


def to_natural_units(config: ScenarioConfig) -> ScenarioConfig:
    """
    Converts masses and potential strengths to hbar = 1 units. Lengths,
    times and momenta are already natural in both input systems (fm and
    fm/c, or cm and s).
    """
    if config.run.units == "natural":
        return config
    units = UNIT_SYSTEMS[config.run.units]
    mass_unit, energy_unit = INPUT_UNITS[config.run.units]

    packet = config.packet.model_copy(
        update={"mass": units.to_natural(config.packet.mass, mass_unit)}
    )
    potential = config.potential
    if potential is not None:
        potential = potential.model_copy(
            update={"v0": units.to_natural(potential.v0, energy_unit)}
        )
    return config.model_copy(
        update={
            "packet": packet,
            "potential": potential,
            "run": config.run.model_copy(update={"units": "natural"}),
        }
    )


def defaulted_parameters(config: ScenarioConfig) -> Dict[str, str]:
    """Every section field that took its default value, plus the preset's own assumptions."""
    assumed = dict(config.assumptions)
    sections = {
        "run": config.run,
        "packet": config.packet,
        "potential": config.potential,
        "grid": config.grid,
        "detector": config.detector,
    }
    for section, spec in sections.items():
        if spec is None:
            continue
        for name in type(spec).model_fields:
            if name not in spec.model_fields_set:
                assumed[f"{section}.{name}"] = str(getattr(spec, name))
    return dict(sorted(assumed.items()))


def config_digest(config: ScenarioConfig, length: int = 12) -> str:
    canonical = json.dumps(config.model_dump(mode="json"), sort_keys=True)
    return hashlib.sha256(canonical.encode()).hexdigest()[:length]


################################################################################
# Pipelines
################################################################################


def _backward_region(x: np.ndarray, pot: Optional[PotentialSpec]) -> np.ndarray:
    if pot is None or pot.v0 == 0:
        return np.ones_like(x, dtype=bool)
    return x < -pot.w


def _pattern_metrics(packet: PacketSpec1D, pot: Optional[PotentialSpec], t: float) -> dict:
    metrics = {}
    if pot is None or packet.q0 <= 0:
        return metrics
    metrics["narrowness_ratio"] = narrowness_ratio(packet, pot)
    metrics["narrowness_class"] = narrowness_class(packet, pot)
    metrics["blur_ratio"] = asymptotic1d.blur_ratio(packet, pot)
    if packet.x0 != 0 and t > 0:
        metrics["predicted_peak_spacing"] = asymptotic1d.predict_peak_spacing(packet, t)
    return metrics


def run_schrodinger(config: ScenarioConfig) -> RunRecord:
    packet, grid = config.packet, config.grid
    pot = config.potential or FREE_SPACE
    evolve_schrodinger.check_domain(grid, packet, pot, grid.t_final)

    field = evolve_schrodinger.init_gaussian(grid, packet)
    result = evolve_schrodinger.evolve(
        field, pot, grid.t_final, snapshot_times=grid.snapshot_times
    )

    label = config.run.label
    profiles = [
        ScalarProfile(label=f"{label}_t{t:g}", t=snap.t, x=snap.x, psi=snap.psi)
        for t, snap in sorted(result.snapshots.items())
    ]
    final = result.final
    profiles.append(ScalarProfile(label=label, t=final.t, x=final.x, psi=final.psi))

    region = _backward_region(final.x, config.potential)
    report = peaks.count_peaks(
        np.abs(final.psi[region]), grid.dx, origin=float(final.x[region][0])
    )
    metrics = _pattern_metrics(packet, config.potential, final.t)
    metrics["steps"] = result.steps
    metrics["max_norm_drift"] = result.max_norm_drift
    return RunRecord(
        name=config.name,
        config=config,
        profiles=tuple(profiles),
        norm_series=tuple(result.norm_series),
        peak_report=report,
        metrics=metrics,
    )


def run_dirac(config: ScenarioConfig) -> RunRecord:
    packet, grid, pot = config.packet, config.grid, config.potential
    evolve_dirac.check_domain(grid, packet, pot, grid.t_final)
    evolve_dirac.resolve_dt(grid, packet.mass, pot)

    field = evolve_dirac.init_dirac_gaussian(grid, packet, nk=config.run.nk)
    result = evolve_dirac.evolve(field, pot, grid.t_final, snapshot_times=grid.snapshot_times)

    label = config.run.label
    profiles = [
        SpinorProfile(label=f"{label}_t{t:g}", t=snap.t, x=snap.x, U=snap.U, V=snap.V)
        for t, snap in sorted(result.snapshots.items())
    ]
    final = result.final
    profiles.append(SpinorProfile(label=label, t=final.t, x=final.x, U=final.U, V=final.V))

    region = _backward_region(final.x, pot)
    report = peaks.count_peaks(
        np.abs(final.U[region]), grid.dx, origin=float(final.x[region][0])
    )
    metrics = _pattern_metrics(packet, pot, final.t)
    metrics["steps"] = result.steps
    metrics["max_norm_drift"] = result.max_norm_drift
    return RunRecord(
        name=config.name,
        config=config,
        profiles=tuple(profiles),
        norm_series=tuple(result.norm_series),
        peak_report=report,
        metrics=metrics,
    )


def run_analytic1d(config: ScenarioConfig) -> RunRecord:
    """
    Long-time backward pattern on the grid at t_final; when the whole grid
    lies in x < -w the momentum-integral oracle is evaluated too and the two
    are compared outside the far region where F(m|x|/t) departs from -1.
    """
    packet, well, grid = config.packet, config.potential, config.grid
    t = grid.t_final
    x = grid.x

    if config.run.long_time:
        asym = asymptotic1d.psi_in_asymptotic(packet, x, t) + asymptotic1d.psi_refl_asymptotic(
            packet, well, x, t
        )
    else:
        asym = asymptotic1d.pattern_amplitude(packet, x, t, long_time=False).astype(
            np.complex128
        )
    profiles = [ScalarProfile(label="asymptotic", t=t, x=x, psi=asym)]
    metrics = _pattern_metrics(packet, well, t)
    metrics["in_regime_fraction"] = float(np.mean(asymptotic1d.in_regime(packet, well, x, t)))

    comparison = None
    reference = np.abs(asym)
    if np.all(x < -well.w):
        oracle = packet_backward_quadrature(packet, well, x, t, nk=config.run.nk)
        profiles.insert(0, ScalarProfile(label=config.run.label, t=t, x=x, psi=oracle))
        k = packet.mass * np.abs(x) / t
        mask = (np.abs(x) >= FIG1_OUTER_CUTOFF) & (
            np.abs(schrodinger_reflection(k, packet.mass, well.v0, well.w) + 1)
            <= FIG1_REFLECTION_TOLERANCE
        )
        comparison = peaks.compare_profiles(x, np.abs(oracle), np.abs(asym), mask=mask)
        metrics["compared_points"] = int(mask.sum())
        reference = np.abs(oracle)

    report = peaks.count_peaks(reference, grid.dx, origin=float(x[0]))
    return RunRecord(
        name=config.name,
        config=config,
        profiles=tuple(profiles),
        peak_report=report,
        comparison=comparison,
        metrics=metrics,
    )


def _map_for(config: ScenarioConfig) -> FieldMap:
    grid = config.grid
    y = grid.y()
    a, b, amplitude = scatter3d.field_map(
        config.packet,
        config.potential,
        extent=(grid.xmin, grid.xmax, float(y[0]), float(y[-1])),
        resolution=(grid.nx, len(y)),
        t=grid.t_final,
        plane=config.run.plane,
        offset=config.run.plane_offset,
    )
    return FieldMap(
        label=config.run.label, t=grid.t_final, plane=config.run.plane, a=a, b=b, amplitude=amplitude
    )


def run_analytic3d(config: ScenarioConfig) -> RunRecord:
    packet, well = config.packet, config.potential
    field_map = _map_for(config)

    metrics: dict = {"impact_parameter": packet.impact_parameter}
    if well is not None and well.v0 != 0:
        k = float(np.linalg.norm(packet.q0))
        metrics["scattering_length"] = scatter3d.scattering_length(packet.mass, well.v0, well.w)
        metrics["phase_shift_l0"] = scatter3d.phase_shift(0, k, packet.mass, well.v0, well.w)
        metrics["phase_shift_l1"] = scatter3d.phase_shift(1, k, packet.mass, well.v0, well.w)
        if packet.impact_parameter == 0:
            alpha, shift = scatter3d.backward_parameters(packet, well)
            metrics["backward_alpha"] = str(alpha)
            metrics["backward_shift"] = str(shift)
    metrics["map_max"] = float(field_map.amplitude.max())
    return RunRecord(name=config.name, config=config, profiles=(field_map,), metrics=metrics)


def stationary_transmission_estimate(packet: PacketSpec1D, barrier: PotentialSpec, nk: int = 64) -> float:
    """
    Fraction of the packet carried through the square potential by its
    forward-moving components: the integral of |a(k)|^2 |T(k)|^2 over k > 0
    divided by the integral of |a(k)|^2 over all k.
    """
    if barrier.kind != "square":
        raise ValueError("transmission estimate needs a square potential")
    spread = 1.0 / (2 * packet.sigma)
    lo = max(0.0, packet.q0 - 8 * spread)
    hi = packet.q0 + 8 * spread
    if hi <= 0:
        return 0.0
    k, wk = composite_gauss_nodes(nk, lo, hi, panels=8)
    weight = np.exp(-2 * packet.sigma**2 * (k - packet.q0) ** 2)
    T = schrodinger_transmission(k, packet.mass, barrier.v0, barrier.w)
    total = math.sqrt(math.pi / (2 * packet.sigma**2))
    return float(np.sum(wk * weight * np.abs(T) ** 2) / total)


def run_experiment_helium(config: ScenarioConfig) -> RunRecord:
    """
    Drop of N atoms spreading against a plate. The detector counts are
    N times the probability inside [position - width/2, position + width/2],
    sampled every detector.interval.
    """
    packet, grid, plate = config.packet, config.grid, config.potential
    detector: DetectorSpec = config.detector
    evolve_schrodinger.check_domain(grid, packet, plate, grid.t_final)

    lo = detector.position - detector.width / 2
    hi = detector.position + detector.width / 2
    n_samples = int(math.floor(grid.t_final / detector.interval + 1e-9))
    probe_times = [i * detector.interval for i in range(n_samples + 1)]

    field = evolve_schrodinger.init_gaussian(grid, packet)
    result = evolve_schrodinger.evolve(
        field,
        plate,
        grid.t_final,
        snapshot_times=grid.snapshot_times,
        probe=lambda f: detector.particle_count * evolve_schrodinger.probability_in(f, lo, hi),
        probe_times=probe_times,
    )

    final = result.final
    transmitted = evolve_schrodinger.probability_in(final, plate.w, grid.xmax)
    metrics = {
        "particle_count": detector.particle_count,
        "total_counts_final": detector.particle_count * result.norm_series[-1][1],
        "transmitted_fraction": transmitted,
        "max_norm_drift": result.max_norm_drift,
        "steps": result.steps,
    }
    if plate.kind == "square":
        metrics["stationary_transmission_estimate"] = stationary_transmission_estimate(
            packet, plate, nk=config.run.nk
        )

    label = config.run.label
    profiles = [
        ScalarProfile(label=f"{label}_t{t:g}", t=snap.t, x=snap.x, psi=snap.psi)
        for t, snap in sorted(result.snapshots.items())
    ]
    profiles.append(ScalarProfile(label=label, t=final.t, x=final.x, psi=final.psi))
    return RunRecord(
        name=config.name,
        config=config,
        profiles=tuple(profiles),
        norm_series=tuple(result.norm_series),
        detector_series=tuple(result.probe_series),
        metrics=metrics,
    )


RUNNERS: Dict[str, Callable[[ScenarioConfig], RunRecord]] = {
    "schrodinger1d": run_schrodinger,
    "dirac1d": run_dirac,
    "analytic1d": run_analytic1d,
    "analytic3d": run_analytic3d,
    "experiment": run_experiment_helium,
}


def run_config(config: ScenarioConfig, nk: Optional[int] = None) -> RunRecord:
    """
    Runs one configuration end to end.

    Args:
        config: ScenarioConfig: validated configuration in any input units.
        nk: int | None: quadrature order overriding run.nk.

    Returns:
        RunRecord: results with the config as given and its defaulted parameters.
    """
    if nk is not None:
        config = config.model_copy(update={"run": config.run.model_copy(update={"nk": nk})})
    natural = to_natural_units(config)

    logger.info(f"run {config.name} ({config.run.mode}) started")
    started = time.perf_counter()
    record = RUNNERS[config.run.mode](natural)
    elapsed = time.perf_counter() - started
    logger.info(f"run {config.name} finished in {elapsed:.2f}s")

    metrics = dict(record.metrics)
    for key, value in defaulted_parameters(config).items():
        metrics[f"assumed.{key}"] = value
    return RunRecord(
        name=record.name,
        config=config,
        profiles=record.profiles,
        norm_series=record.norm_series,
        detector_series=record.detector_series,
        peak_report=record.peak_report,
        comparison=record.comparison,
        metrics=metrics,
        wall_clock=elapsed,
    )


################################################################################
# Presets
################################################################################


def _grid(xmin: float, xmax: float, dx: float, **kwargs) -> GridSpec:
    return GridSpec(xmin=xmin, xmax=xmax, nx=int(round((xmax - xmin) / dx)) + 1, **kwargs)


def fig1() -> ScenarioConfig:
    return ScenarioConfig(
        preset_name="fig1",
        run=RunOptions(mode="analytic1d"),
        packet=PacketSpec1D(sigma=0.5, q0=0.4, x0=-60.0, mass=40.0),
        potential=PotentialSpec(kind="square", v0=-1.0, w=1.0),
        grid=GridSpec(xmin=-1.2e5, xmax=-2.0, nx=61, t_final=1.2e7),
        assumptions={"grid": "pattern sampled every ~2000 on x in [-1.2e5, -w]"},
    )


def _barrier_run(name: str, sigma: float, t_final: float, half_width: float) -> ScenarioConfig:
    return ScenarioConfig(
        preset_name=name,
        run=RunOptions(mode="schrodinger1d"),
        packet=PacketSpec1D(sigma=sigma, q0=1.0, x0=-10.0, mass=1.0),
        potential=PotentialSpec(kind="gaussian", v0=0.2, w=1.0),
        grid=_grid(-half_width, half_width, 0.1, dt=0.05, t_final=t_final),
    )


def fig4() -> ScenarioConfig:
    return _barrier_run("fig4", sigma=0.5, t_final=800.0, half_width=4800.0)


def fig5() -> ScenarioConfig:
    return _barrier_run("fig5", sigma=2.0, t_final=1200.0, half_width=2700.0)


def _dirac_run(name: str, sigma: float, t_final: float, half_width: float, dx: float) -> ScenarioConfig:
    return ScenarioConfig(
        preset_name=name,
        run=RunOptions(mode="dirac1d"),
        packet=PacketSpec1D(sigma=sigma, q0=1.0, x0=-10.0, mass=1.0),
        potential=PotentialSpec(kind="square", v0=-1.0, w=1.0),
        grid=_grid(-half_width, half_width, dx, dt=0.05, t_final=t_final),
    )


def fig6() -> ScenarioConfig:
    return _dirac_run("fig6", sigma=0.5, t_final=800.0, half_width=900.0, dx=0.05)


def fig7() -> ScenarioConfig:
    return _dirac_run("fig7", sigma=2.0, t_final=1200.0, half_width=1300.0, dx=0.1)


def _neutron_map(name: str, depth_mev: float) -> ScenarioConfig:
    mass = NEUTRON_MASS_MEV / HBAR_C_MEV_FM
    extent = 3e14
    return ScenarioConfig(
        preset_name=name,
        run=RunOptions(mode="analytic3d", plane="xy"),
        packet=PacketSpec3D(
            sigma=1.0, q0_vec=(0.02 * mass, 0.0, 0.0), r0_vec=(-20.0, 2.0, 0.0), mass=mass
        ),
        potential=PotentialSpec(kind="square", v0=-depth_mev / HBAR_C_MEV_FM, w=10.0),
        grid=GridSpec(
            xmin=-extent, xmax=extent, nx=161, ymin=-extent, ymax=extent, ny=161, t_final=5e14
        ),
        assumptions={"packet.velocity": "0.02 c along x", "units": "fm, fm/c"},
    )


def fig8() -> ScenarioConfig:
    return _neutron_map("fig8", depth_mev=40.0)


def fig9() -> ScenarioConfig:
    return _neutron_map("fig9", depth_mev=40.0 * 1.05)


def fig10() -> ScenarioConfig:
    """
    Helium-4 drop against a 1 cm plate, laboratory units (cm, s, amu, eV).

    At 4 eV the stationary transmission estimate underflows to 0, so the
    transmitted fraction can only be checked against zero here.
    """
    return ScenarioConfig(
        preset_name="fig10",
        run=RunOptions(mode="experiment", units="laboratory"),
        packet=PacketSpec1D(sigma=0.5, q0=0.0, x0=-3.5, mass=HELIUM4_MASS_AMU),
        potential=PotentialSpec(kind="square", v0=4.0, w=0.5),
        grid=_grid(-85.0, 85.0, 0.02, dt=10.0, t_final=1e5),
        detector=DetectorSpec(position=-5.5, width=0.1, interval=10.0, particle_count=5e21),
        assumptions={
            "packet.q0": "0 (no drift; the drop spreads against the plate)",
            "packet.sigma": "0.5 cm (drop of about 1 cm^3)",
            "packet.x0": "3 cm before the near plate face",
            "detector.position": "5 cm from the plate on the drop side",
            "potential.w": "0.5 cm half-width (w = 1 cm read as the plate thickness)",
        },
    )


PRESETS: Dict[str, Callable[[], ScenarioConfig]] = {
    "fig1": fig1,
    "fig4": fig4,
    "fig5": fig5,
    "fig6": fig6,
    "fig7": fig7,
    "fig8": fig8,
    "fig9": fig9,
    "fig10": fig10,
}

# -F(k) curves near a zero-energy resonance: (k'0 w / scale, scale, widths)
REFLECTION_CURVES = {
    "fig2": (1.00658424209, 2 * math.pi, (1.0, 2.0)),
    "fig3": (0.9998902939413, 2.25 * math.pi, (1.0, 1.5)),
}
REFLECTION_K = (0.001, 2.0, 2000)


def reflection_curves(name: str) -> RunRecord:
    """-F(k) for m = 1 and the well depths that put k'0 w next to a threshold."""
    ratio, scale, widths = REFLECTION_CURVES[name]
    k = np.linspace(*REFLECTION_K)
    profiles = []
    metrics: dict = {"mass": 1.0, "k_min": REFLECTION_K[0], "k_max": REFLECTION_K[1]}
    for w in widths:
        kprime0 = ratio * scale / w
        v0 = -(kprime0**2) / 2
        minus_f = -schrodinger_reflection(k, 1.0, v0, w)
        profiles.append(ScalarProfile(label=f"w{w:g}", t=0.0, x=k, psi=minus_f))
        metrics[f"v0_w{w:g}"] = v0
        metrics[f"minus_F_at_kmin_w{w:g}"] = float(minus_f[0].real)
    return RunRecord(name=name, config=None, profiles=tuple(profiles), metrics=metrics)


def preset_names() -> List[str]:
    return sorted([*PRESETS, *REFLECTION_CURVES], key=lambda n: int(n[3:]))


def map_noise_floor(amplitude: np.ndarray) -> float:
    return float(np.finfo(float).eps * amplitude.max() * math.sqrt(amplitude.size))


def run_preset(name: str, nk: Optional[int] = None) -> RunRecord:
    """
    Runs a named figure preset.

    Raises:
        KeyError: for unknown names.
    """
    if name in REFLECTION_CURVES:
        started = time.perf_counter()
        record = reflection_curves(name)
        return RunRecord(
            name=record.name,
            config=None,
            profiles=record.profiles,
            metrics=record.metrics,
            wall_clock=time.perf_counter() - started,
        )

    config = PRESETS[name]()
    record = run_config(config, nk=nk)
    if name != "fig9":
        return record

    baseline = _map_for(to_natural_units(fig8()))
    current = record.profiles[0]
    difference = float(np.max(np.abs(current.amplitude - baseline.amplitude)))
    metrics = dict(record.metrics)
    metrics["max_difference_from_fig8"] = difference
    metrics["noise_floor"] = map_noise_floor(baseline.amplitude)
    return RunRecord(
        name=record.name,
        config=record.config,
        profiles=record.profiles,
        metrics=metrics,
        wall_clock=record.wall_clock,
    )


################################################################################
# Sweeps
################################################################################


def _set_path(document: dict, path: str, value: float) -> None:
    section, _, key = path.partition(".")
    if not key:
        raise ValueError(f"sweep key '{path}' must look like section.field")
    if section not in document or document[section] is None:
        raise ValueError(f"sweep key '{path}' refers to a missing section")
    if key not in document[section]:
        raise ValueError(f"sweep key '{path}' is not a field of [{section}]")
    document[section][key] = value


def expand_sweep(config: ScenarioConfig, axes: Dict[str, Sequence[float]]) -> List[ScenarioConfig]:
    """
    Cartesian product of the axes applied to config, in the order the axes
    and their values are given.

    Raises:
        ValueError: for empty axes or unknown keys; pydantic errors for invalid points.
    """
    for key, values in axes.items():
        if not values:
            raise ValueError(f"sweep axis '{key}' has no values")

    keys = list(axes)
    points = []
    for combination in itertools.product(*(axes[k] for k in keys)):
        document = config.model_dump()
        for key, value in zip(keys, combination):
            _set_path(document, key, value)
        points.append(ScenarioConfig.model_validate(document))
    return points
