"""
Long-time closed forms of the 1D reflected packet.

The saddle point of the reflected integral sits at
k_extremal ~ (2 sigma^2 q0 - i x) / (2 sigma^2 + i t / 2m); the forms below use
its k ~ 0 limit where the reflection amplitude is -1.
"""

import math
from dataclasses import dataclass

import numpy as np
from loguru import logger
from numpy.typing import ArrayLike, NDArray

from src.wpdiff.domain.model import InvalidSpec, PacketSpec1D, PotentialSpec


@dataclass(frozen=True)
class AsymptoticPattern:
    amplitude_prefactor: float
    z: NDArray
    sin_arg_real: NDArray
    sin_arg_imag: NDArray

    @property
    def amplitude(self) -> NDArray:
        return (
            self.amplitude_prefactor
            * np.exp(-self.z)
            * np.sqrt(np.sin(self.sin_arg_real) ** 2 + np.sinh(self.sin_arg_imag) ** 2)
        )


def _require_positive_time(t: float) -> None:
    if t <= 0:
        raise ValueError("asymptotic forms need t > 0")


def _prefactor(packet: PacketSpec1D, t: float) -> complex:
    return np.sqrt(np.pi / (packet.sigma**2 + 1j * t / (2 * packet.mass)))


def in_regime(packet: PacketSpec1D, well: PotentialSpec, x: ArrayLike, t: float) -> NDArray:
    """Validity of the long-time forms: t >> 2 m sigma^2 and |x| >> |x0| >> w."""
    x = np.asarray(x, dtype=float)
    long_time = t > 10 * 2 * packet.mass * packet.sigma**2
    far = abs(packet.x0) > 10 * well.w
    return long_time & far & (np.abs(x) > 10 * abs(packet.x0)) & (x < -well.w)


def psi_in_asymptotic(packet: PacketSpec1D, x: ArrayLike, t: float) -> NDArray:
    _require_positive_time(t)
    x = np.asarray(x, dtype=float)
    m, s, q0, x0 = packet.mass, packet.sigma, packet.q0, packet.x0
    u = 1j * m / (2 * t) * (x - x0) ** 2 - (m**2 * s**2 / t**2) * (
        x - x0 - q0 * t / m
    ) ** 2
    return _prefactor(packet, t) * np.exp(u)


def psi_refl_asymptotic(
    packet: PacketSpec1D,
    well: PotentialSpec,
    x: ArrayLike,
    t: float,
    reflection: complex = -1.0,
) -> NDArray:
    """
    Reflected wave for long times, scaled by the zero-momentum reflection
    amplitude (-1 by default) so that psi_in + psi_refl is the full
    backward wave.
    """
    _require_positive_time(t)
    x = np.asarray(x, dtype=float)
    if not np.all(in_regime(packet, well, x, t)):
        logger.debug("psi_refl_asymptotic evaluated partly outside its regime")

    m, s, q0, x0 = packet.mass, packet.sigma, packet.q0, packet.x0
    u = 1j * m / (2 * t) * (x + x0) ** 2 - (m**2 * s**2 / t**2) * (
        x + x0 + q0 * t / m
    ) ** 2
    return reflection * _prefactor(packet, t) * np.exp(u)


def pattern(packet: PacketSpec1D, x: ArrayLike, t: float, long_time: bool = True) -> AsymptoticPattern:
    """
    Factors of |psi_in + psi_refl| in the F = -1 approximation.

    With long_time the O(1/t) terms are dropped as in the printed formula;
    otherwise the exact modulus of the two Gaussian terms is kept.
    """
    _require_positive_time(t)
    x = np.asarray(x, dtype=float)
    m, s, q0, x0 = packet.mass, packet.sigma, packet.q0, packet.x0

    if long_time:
        return AsymptoticPattern(
            amplitude_prefactor=2 * math.sqrt(2 * m * math.pi / t),
            z=s**2 * (m**2 * (x**2 + x0**2) / t**2 + q0**2),
            sin_arg_real=m * x * x0 / t,
            sin_arg_imag=2 * s**2 * q0 * m * x / t,
        )

    return AsymptoticPattern(
        amplitude_prefactor=2 * float(abs(_prefactor(packet, t))),
        z=(m**2 * s**2 / t**2) * (x**2 + (x0 + q0 * t / m) ** 2),
        sin_arg_real=m * x * x0 / t,
        sin_arg_imag=2 * s**2 * m * x * (m * x0 / t + q0) / t,
    )


def pattern_amplitude(packet: PacketSpec1D, x: ArrayLike, t: float, long_time: bool = True) -> NDArray:
    """
    |psi| = 2 sqrt(2 m pi / t) e^{-z} sqrt(sin^2(m x x0 / t) + sinh^2(2 sigma^2 q0 m x / t)),
    z = sigma^2 (m^2 (x^2 + x0^2) / t^2 + q0^2).
    """
    return pattern(packet, x, t, long_time).amplitude


def predict_peak_spacing(packet: PacketSpec1D, t: float) -> float:
    """Distance between zeros of the sin factor, pi t / (m |x0|)."""
    _require_positive_time(t)
    if packet.x0 == 0:
        raise InvalidSpec("peak spacing is undefined for x0 = 0")
    return math.pi * t / (packet.mass * abs(packet.x0))


def blur_ratio(packet: PacketSpec1D, pot: PotentialSpec) -> float:
    """
    sinh(2 sigma^2 q0 k_max) with k_max = 1 / (2w): the sinh term of the
    pattern at the stationary momentum k_max. Values above 1 mean it fills
    the zeros of the sin factor.
    """
    k_max = 1.0 / (2 * pot.w)
    return math.sinh(2 * packet.sigma**2 * packet.q0 * k_max)
