import time
from dataclasses import dataclass, field
from typing import Callable, Generic, Optional, Sequence, TypeVar

from loguru import logger

FieldT = TypeVar("FieldT")

NORM_SAMPLES = 1000


@dataclass
class Evolution(Generic[FieldT]):
    """Output of one evolve call; snapshot keys are the requested times."""

    final: FieldT
    snapshots: dict[float, FieldT] = field(default_factory=dict)
    norm_series: list[tuple[float, float]] = field(default_factory=list)
    probe_series: list[tuple[float, float]] = field(default_factory=list)
    steps: int = 0

    @property
    def max_norm_drift(self) -> float:
        if not self.norm_series:
            return 0.0
        first = self.norm_series[0][1]
        return max(abs(n - first) for _, n in self.norm_series)


def _step_index(t: float, t0: float, dt: float) -> int:
    return int(round((t - t0) / dt))


def run_steps(
    start: FieldT,
    advance: Callable[[FieldT], FieldT],
    norm: Callable[[FieldT], float],
    dt: float,
    until: float,
    snapshot_times: Sequence[float] = (),
    probe: Optional[Callable[[FieldT], float]] = None,
    probe_times: Sequence[float] = (),
    norm_every: Optional[int] = None,
) -> Evolution[FieldT]:
    """
    Repeats `advance` from start.t to `until`. Snapshots and probe samples
    are taken at the completed step nearest to each requested time.
    """
    t0 = start.t
    if until < t0:
        raise ValueError(f"cannot evolve backwards from t={t0} to {until}")

    nsteps = _step_index(until, t0, dt)
    every = norm_every or max(1, nsteps // NORM_SAMPLES)

    snapshot_at: dict[int, list[float]] = {}
    for ts in snapshot_times:
        if ts < t0 or ts > until:
            raise ValueError(f"snapshot time {ts} outside [{t0}, {until}]")
        snapshot_at.setdefault(_step_index(ts, t0, dt), []).append(ts)
    probe_at: dict[int, list[float]] = {}
    for tp in probe_times:
        probe_at.setdefault(_step_index(tp, t0, dt), []).append(tp)

    result = Evolution(final=start)
    current = start
    started = time.perf_counter()
    report_every = max(1, nsteps // 10)

    for n in range(nsteps + 1):
        if n > 0:
            current = advance(current)
        for ts in snapshot_at.get(n, ()):
            result.snapshots[ts] = current
        if probe is not None:
            for tp in probe_at.get(n, ()):
                result.probe_series.append((tp, probe(current)))
        if n % every == 0 or n == nsteps:
            result.norm_series.append((current.t, norm(current)))
        if n and n % report_every == 0:
            logger.debug(
                f"step {n}/{nsteps} t={current.t:.6g} "
                f"norm={result.norm_series[-1][1]:.12f} "
                f"elapsed={time.perf_counter() - started:.1f}s"
            )

    result.final = current
    result.steps = nsteps
    return result
