"""
Three-dimensional Gaussian packet scattered by a square well, s-wave only.

All complex "distances" use the non-conjugating vector square root
sqrt(sum_j c_j^2) on the branch with non-negative real part. Products of
exp(lambda^2) and erfc(-lambda) are evaluated together as the Faddeeva
function so that neither factor overflows on its own.
"""

import math
from dataclasses import dataclass
from typing import Literal, Optional

import numpy as np
from loguru import logger
from numpy.typing import ArrayLike, NDArray

from src.wpdiff.domain.model import PacketSpec3D, PotentialSpec
from src.wpdiff.physics.errors import DegenerateError, PoleError
from src.wpdiff.physics.specfun import bessel_log_derivative, scaled_erfc

SMALL_K_LIMIT = 0.5
POLE_TOLERANCE = 1e-8


@dataclass(frozen=True)
class ComplexDisplacement:
    value: NDArray[np.complex128]
    # the square was (numerically) a negative real number; value is +i sqrt(|.|)
    ambiguous: NDArray[np.bool_]


@dataclass(frozen=True)
class SWaveResult:
    u0: float
    d: complex
    lambda1: NDArray[np.complex128]
    lambda2: NDArray[np.complex128]
    psi_scatt: NDArray[np.complex128]


def complex_displacement(r_vec: ArrayLike, r0_vec: ArrayLike, sigma: float, q0_vec: ArrayLike) -> ComplexDisplacement:
    """|r - r0 - 2i sigma^2 q0| for r_vec of shape (..., 3)."""
    c = (
        np.asarray(r_vec, dtype=float)
        - np.asarray(r0_vec, dtype=float)
        - 2j * sigma**2 * np.asarray(q0_vec, dtype=float)
    )
    square = np.sum(c**2, axis=-1)
    value = np.sqrt(square)
    ambiguous = (square.real < 0) & (np.abs(square.imag) <= 1e-14 * np.abs(square))
    value = np.where(ambiguous, 1j * np.sqrt(np.abs(square)), value)
    return ComplexDisplacement(value=value, ambiguous=ambiguous)


def _width(packet: PacketSpec3D, t: float) -> complex:
    return packet.sigma**2 + 1j * t / (2 * packet.mass)


def free_packet_3d(packet: PacketSpec3D, r_vec: ArrayLike, t: float) -> NDArray[np.complex128]:
    """Exact free Gaussian, the 3D momentum integral (pi/A)^{3/2} exp(-D^2/4A - q0^2 sigma^2)."""
    A = _width(packet, t)
    D = complex_displacement(r_vec, packet.r0, packet.sigma, packet.q0).value
    q2 = float(np.dot(packet.q0, packet.q0))
    return (np.pi / A) ** 1.5 * np.exp(-(D**2) / (4 * A) - q2 * packet.sigma**2)


def psi_in_3d(packet: PacketSpec3D, r_vec: ArrayLike, t: float) -> NDArray[np.complex128]:
    """
    Incoming wave (pi/A)^{3/2} e^{y1} erfc(-iD/(2 sqrt(A))),
    y1 = -D^2/(4A) - q0^2 sigma^2, A = sigma^2 + it/2m.

    The erfc argument carries the same 1/2 as lambda_1,2 of the scattered
    wave, so e^{y1 - z^2} = e^{-q0^2 sigma^2} and the product stays bounded;
    the long-time limit is 2 e^{y1}. Points where the product is still not
    finite fall back to that limit with a warning.
    """
    if t < 0:
        raise ValueError("psi_in_3d needs t >= 0")
    A = _width(packet, t)
    D = complex_displacement(r_vec, packet.r0, packet.sigma, packet.q0).value
    q2 = float(np.dot(packet.q0, packet.q0))
    y1 = -(D**2) / (4 * A) - q2 * packet.sigma**2
    z = -1j * D / (2 * np.sqrt(A))

    # e^{y1} erfc(z) = e^{y1 - z^2} w(iz) on Re z >= 0, reflected otherwise
    right = z.real >= 0
    zr = np.where(right, z, -z)
    with np.errstate(over="ignore", invalid="ignore"):
        tail = np.exp(y1 - zr**2) * scaled_erfc(zr)
        value = np.where(right, tail, 2 * np.exp(y1) - tail)

    bad = ~np.isfinite(value)
    if np.any(bad):
        logger.warning(
            f"erfc overflow at {int(np.sum(bad))} points; using the long-time limit"
        )
        value = np.where(bad, 2 * np.exp(y1), value)
    return (np.pi / A) ** 1.5 * value


def _double_factorial(n: int) -> int:
    return math.prod(range(n, 0, -2)) if n > 0 else 1


def _interior_wavenumber(m: float, v0: float) -> float:
    if v0 > 0:
        raise ValueError("phase shifts are implemented for wells (v0 <= 0)")
    return math.sqrt(2 * m * abs(v0))


def phase_shift(l: int, k: float, m: float, v0: float, w: float) -> float:
    """
    Small-k phase shift of partial wave l for a square well of depth |v0|:
    tan(delta_l) = -(kw)^{2l+1} / ((2l-1)!! (2l+1)!!) (z_l - l)/(z_l + l + 1),
    z_l = x j_l'(x)/j_l(x) at x = sqrt(k^2 + 2m|v0|) w.

    Returns:
        float: delta_l in (-pi/2, pi/2].
    """
    kappa = _interior_wavenumber(m, v0)
    if k * w > SMALL_K_LIMIT:
        logger.warning(f"phase_shift outside the small-k regime: kw={k * w:.3g}")

    x = math.sqrt(k**2 + kappa**2) * w
    zl = bessel_log_derivative(l, x)
    denominator = zl + l + 1
    if denominator == 0:
        return math.pi / 2
    prefactor = (k * w) ** (2 * l + 1) / (
        _double_factorial(2 * l - 1) * _double_factorial(2 * l + 1)
    )
    return math.atan(-prefactor * (zl - l) / denominator)


def scattering_length(m: float, v0: float, w: float) -> float:
    """
    u0 = w (1 - tan(kappa w)/(kappa w)), kappa = sqrt(2m|v0|).

    Raises:
        PoleError: at a zero-energy bound state threshold, kappa w = pi/2 + n pi.
    """
    kappa = _interior_wavenumber(m, v0)
    if kappa == 0:
        return 0.0
    kw = kappa * w
    if abs(math.cos(kw)) < POLE_TOLERANCE:
        raise PoleError(f"kappa w = {kw} sits on a tan pole")
    return w * (1 - math.tan(kw) / kw)


def initial_offset(packet: PacketSpec3D) -> complex:
    """d = |r0 + 2i sigma^2 q0|."""
    return complex(
        complex_displacement(packet.r0, np.zeros(3), packet.sigma, -packet.q0).value
    )


def psi_scatt_swave(
    packet: PacketSpec3D,
    well: PotentialSpec,
    r: ArrayLike,
    t: float,
    long_time: bool = False,
) -> SWaveResult:
    """
    s-wave scattered wave

        -(u0/d) (pi/A)^{3/2} e^{-q0^2 sigma^2}
            ((r+d)/(2r) e^{l1^2} erfc(-l1) - (r-d)/(2r) e^{l2^2} erfc(-l2)),

    l1,2 = i (r +- d) / (2 sqrt(A)). With long_time both erfc are replaced by 2.
    """
    r = np.asarray(r, dtype=float)
    if np.any(r <= 0):
        raise ValueError("psi_scatt_swave needs r > 0")

    q2 = float(np.dot(packet.q0, packet.q0))
    if q2 * well.w**2 > 0.01:
        logger.warning("p-wave contribution may exceed 1%; s-wave result is approximate")

    u0 = scattering_length(packet.mass, well.v0, well.w)
    d = initial_offset(packet)
    if d == 0:
        raise DegenerateError("d = |r0 + 2i sigma^2 q0| vanishes")

    A = _width(packet, t)
    sqrt_a = np.sqrt(A)
    lambda1 = 1j * (r + d) / (2 * sqrt_a)
    lambda2 = 1j * (r - d) / (2 * sqrt_a)

    if long_time:
        term1, term2 = 2 * np.exp(lambda1**2), 2 * np.exp(lambda2**2)
    else:
        term1, term2 = scaled_erfc(-lambda1), scaled_erfc(-lambda2)

    bracket = (r + d) / (2 * r) * term1 - (r - d) / (2 * r) * term2
    psi = -(u0 / d) * (np.pi / A) ** 1.5 * np.exp(-q2 * packet.sigma**2) * bracket
    return SWaveResult(u0=u0, d=d, lambda1=lambda1, lambda2=lambda2, psi_scatt=psi)


def _require_head_on(packet: PacketSpec3D) -> None:
    if packet.impact_parameter > 1e-12 * max(1.0, float(np.linalg.norm(packet.r0))):
        raise ValueError("the backward closed form assumes zero impact parameter")


def backward_parameters(packet: PacketSpec3D, well: PotentialSpec) -> tuple[complex, complex]:
    """
    (alpha, shift) of the backward pattern 2 e^alpha sinh(r d / 2A + shift):
    e^alpha = sqrt(u0 (2d + u0) / d^2) and e^{2 shift} = (2d + u0) / u0.
    """
    u0 = scattering_length(packet.mass, well.v0, well.w)
    d = initial_offset(packet)
    if d == 0:
        raise DegenerateError("d = |r0 + 2i sigma^2 q0| vanishes")
    if u0 == 0:
        return complex(-np.inf), complex(np.inf)
    a, b = 2 + u0 / d, u0 / d
    return 0.5 * np.log(a * b + 0j), 0.5 * np.log(a / b + 0j)


def backward_pattern_3d(packet: PacketSpec3D, well: PotentialSpec, r: ArrayLike, t: float) -> NDArray[np.complex128]:
    """
    Long-time wave in the backward direction (erfc -> 2, r >> d):

        (pi/A)^{3/2} e^{-q0^2 sigma^2 - (r^2 + d^2)/4A} ((2 + u0/d) e^{y} - (u0/d) e^{-y}),

    y = r d / 2A. This equals 2 e^alpha sinh(y + shift) times the envelope;
    its modulus oscillates with period pi t / (m r0) in r.
    """
    _require_head_on(packet)
    r = np.asarray(r, dtype=float)
    u0 = scattering_length(packet.mass, well.v0, well.w)
    d = initial_offset(packet)
    if d == 0:
        raise DegenerateError("d = |r0 + 2i sigma^2 q0| vanishes")

    A = _width(packet, t)
    q2 = float(np.dot(packet.q0, packet.q0))
    y = r * d / (2 * A)
    envelope = (np.pi / A) ** 1.5 * np.exp(-q2 * packet.sigma**2 - (r**2 + d**2) / (4 * A))
    return envelope * ((2 + u0 / d) * np.exp(y) - (u0 / d) * np.exp(-y))


def backward_pattern_sine(packet: PacketSpec3D, well: PotentialSpec, r: ArrayLike, t: float) -> NDArray[np.complex128]:
    """
    Sine form of the backward pattern with the phase taken at A -> it/2m:

        -2i (pi/A)^{3/2} e^alpha sin((m r / t) d + i shift) e^{-q0^2 sigma^2 - (r^2 + d^2)/4A}.

    The imaginary offset in the sine is `shift`, not alpha; only then do both
    exponentials of backward_pattern_3d come out with their own weights.
    """
    _require_head_on(packet)
    r = np.asarray(r, dtype=float)
    alpha, shift = backward_parameters(packet, well)
    d = initial_offset(packet)

    A = _width(packet, t)
    q2 = float(np.dot(packet.q0, packet.q0))
    envelope = (np.pi / A) ** 1.5 * np.exp(-q2 * packet.sigma**2 - (r**2 + d**2) / (4 * A))
    phase = packet.mass * r * d / t
    if not np.isfinite(alpha.real):
        return 2 * envelope * np.exp(-1j * phase)
    return -2j * np.exp(alpha) * np.sin(phase + 1j * shift) * envelope


def backward_direction(packet: PacketSpec3D) -> np.ndarray:
    q = packet.q0
    norm = np.linalg.norm(q)
    if norm == 0:
        raise DegenerateError("backward direction undefined for q0 = 0")
    return -q / norm


def field_map(
    packet: PacketSpec3D,
    well: Optional[PotentialSpec],
    extent: tuple[float, float, float, float],
    resolution: tuple[int, int],
    t: float,
    plane: Literal["xy", "xz"] = "xy",
    offset: float = 0.0,
) -> tuple[NDArray, NDArray, NDArray]:
    """
    |psi_in + psi_scatt| |A|^{3/2} on a plane z = offset ("xy") or
    y = offset ("xz").

    Returns:
        tuple: (first-axis coordinates, second-axis coordinates, amplitude of
            shape (n_second, n_first)).
    """
    a_min, a_max, b_min, b_max = extent
    na, nb = resolution
    a = np.linspace(a_min, a_max, na)
    b = np.linspace(b_min, b_max, nb)
    aa, bb = np.meshgrid(a, b)
    cc = np.full_like(aa, offset)
    if plane == "xy":
        points = np.stack([aa, bb, cc], axis=-1)
    elif plane == "xz":
        points = np.stack([aa, cc, bb], axis=-1)
    else:
        raise ValueError(f"unknown plane '{plane}'")

    psi = psi_in_3d(packet, points, t)
    if well is not None and well.v0 != 0:
        r = np.linalg.norm(points, axis=-1)
        r = np.maximum(r, 1e-12 * max(abs(a_min), abs(a_max), abs(b_min), abs(b_max)))
        psi = psi + psi_scatt_swave(packet, well, r, t).psi_scatt

    return a, b, np.abs(psi) * abs(_width(packet, t)) ** 1.5
