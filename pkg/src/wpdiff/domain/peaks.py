"""
Peak counting and profile comparison on sampled |psi| curves.

A peak is a sample strictly above its `window` neighbours on each side and
at least `height_fraction` of the global maximum. Two neighbouring
candidates count separately only if the valley between them falls to
`valley_fraction` of the lower one; otherwise the higher one is kept.
"""

from typing import Optional

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy import signal

from src.wpdiff.domain.scenario_model import (
    HEIGHT_FRACTION,
    PEAK_WINDOW,
    VALLEY_FRACTION,
    ComparisonMetrics,
    PeakReport,
)


class GridMismatchError(ValueError):
    pass


def peak_indices(
    profile: NDArray,
    height_fraction: float = HEIGHT_FRACTION,
    valley_fraction: float = VALLEY_FRACTION,
    window: int = PEAK_WINDOW,
) -> list[int]:
    profile = np.asarray(profile, dtype=float)
    n = len(profile)
    if n < 2 * window + 1:
        raise ValueError(f"profile needs at least {2 * window + 1} samples, got {n}")

    top = profile.max()
    if not top > 0:
        return []

    maxima, _ = signal.find_peaks(profile, height=height_fraction * top)
    candidates = []
    for i in maxima:
        if i < window or i >= n - window:
            continue
        neighbours = np.concatenate((profile[i - window : i], profile[i + 1 : i + window + 1]))
        if np.all(profile[i] > neighbours):
            candidates.append(int(i))

    kept: list[int] = []
    for c in candidates:
        if not kept:
            kept.append(c)
            continue
        last = kept[-1]
        valley = profile[last : c + 1].min()
        if valley <= valley_fraction * min(profile[last], profile[c]):
            kept.append(c)
        elif profile[c] > profile[last]:
            kept[-1] = c
    return kept


def count_peaks(profile: ArrayLike, dx: float, origin: float = 0.0) -> PeakReport:
    """
    Args:
        profile: ArrayLike: sampled non-negative curve, at least 7 samples.
        dx: float: sample spacing.
        origin: float: coordinate of the first sample.

    Returns:
        PeakReport: count and ascending positions.
    """
    idx = peak_indices(np.asarray(profile, dtype=float))
    return PeakReport(count=len(idx), positions=tuple(origin + i * dx for i in idx))


def compare_profiles(
    x: ArrayLike,
    a: ArrayLike,
    b: ArrayLike,
    x_b: Optional[ArrayLike] = None,
    mask: Optional[ArrayLike] = None,
) -> ComparisonMetrics:
    """
    Metrics between two |psi| profiles sampled at the same points x.

    Peak offsets are, for each peak of a, the position of the nearest peak
    of b minus the position of the a peak. `mask` restricts every metric to
    the selected samples.

    Raises:
        GridMismatchError: if the arrays or the two grids disagree.
    """
    x = np.asarray(x, dtype=float)
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if not (len(x) == len(a) == len(b)):
        raise GridMismatchError(f"lengths differ: x={len(x)} a={len(a)} b={len(b)}")
    if x_b is not None:
        x_b = np.asarray(x_b, dtype=float)
        if x_b.shape != x.shape or not np.allclose(x, x_b, rtol=1e-12, atol=0.0):
            raise GridMismatchError("profiles are sampled on different grids")

    if mask is not None:
        mask = np.asarray(mask, dtype=bool)
        x, a, b = x[mask], a[mask], b[mask]

    max_abs = float(np.max(np.abs(a - b))) if len(a) else 0.0
    ia = peak_indices(a) if len(a) >= 2 * PEAK_WINDOW + 1 else []
    ib = peak_indices(b) if len(b) >= 2 * PEAK_WINDOW + 1 else []

    peak_relative = 0.0
    if ia:
        peak_relative = float(max(abs(a[i] - b[i]) / a[i] for i in ia))

    offsets: list[float] = []
    if ib:
        xb_peaks = x[ib]
        for i in ia:
            nearest = xb_peaks[np.argmin(np.abs(xb_peaks - x[i]))]
            offsets.append(float(nearest - x[i]))

    return ComparisonMetrics(
        max_abs=max_abs,
        peak_relative=peak_relative,
        peak_offsets=tuple(offsets),
        peaks_a=len(ia),
        peaks_b=len(ib),
    )
