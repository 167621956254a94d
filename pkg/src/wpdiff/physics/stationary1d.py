"""
Stationary scattering by a square well and the momentum-space packet oracle.

Phase convention: the Schrödinger backward-region state is
e^{ik(x-x0)} + F e^{-ik(x+x0+2w)}, which absorbs the initial position into the
stationary state. The Dirac coefficients B, C, D, F are returned in the
printed form; the physically matched amplitudes at the well edges are these
times e^{-2ikw}, which is what `dirac_stationary` and the packet quadrature
use. With that factor the backward-region Dirac integrand has the same
e^{-ik(x+x0+2w)} structure as the Schrödinger one.
"""

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from loguru import logger
from numpy.typing import ArrayLike, NDArray

from src.wpdiff.domain.model import PacketSpec1D, PotentialSpec
from src.wpdiff.physics.errors import ConvergenceError, DegenerateError
from src.wpdiff.physics.specfun import composite_gauss_nodes, gauss_quadrature_nodes

DEGENERATE_THRESHOLD = 1e-300
# exp(-s^2) < 3e-16 beyond |s| = 6 on the steepest-descent line
STEEPEST_DESCENT_HALF_WIDTH = 6.0
# relativistic weight exp(-2 sigma^2 (E E0 - k q0 - m^2)) below exp(-32) outside
DIRAC_WINDOW_EXPONENT = 32.0
CHUNK_ROWS = 256


@dataclass(frozen=True)
class SchrodingerCoeffs:
    k: NDArray
    kprime: NDArray
    D: NDArray
    E: NDArray
    A: NDArray
    F: NDArray
    T: NDArray
    # E and A carry a common factor e^{2ik'w} when the printed form overflows
    scaled: bool = False


@dataclass(frozen=True)
class DiracCoeffs:
    k: NDArray
    E_rel: NDArray
    mstar: float
    kprime: NDArray
    g: NDArray
    B: NDArray
    C: NDArray
    D: NDArray
    F: NDArray
    Delta: NDArray
    evanescent: NDArray


def _interior_momentum(k, m: float, v0: float) -> NDArray[np.complex128]:
    kp = np.sqrt(np.asarray(k, dtype=np.complex128) ** 2 - 2.0 * m * v0)
    # F is even in k'; Im k' >= 0 keeps e^{4ik'w} bounded
    return np.where(kp.imag < 0, -kp, kp)


def _check_square(well: Optional[PotentialSpec]) -> None:
    if well is not None and well.kind != "square":
        raise ValueError("stationary amplitudes exist for the square well only")


def schrodinger_reflection(k: ArrayLike, m: float, v0: float, w: float) -> NDArray:
    """
    F(k) in the e^{-ik(x+x0+2w)} convention, evaluated in a form that stays
    finite for complex k and for barriers (complex k').
    """
    k = np.asarray(k, dtype=np.complex128)
    kp = _interior_momentum(k, m, v0)
    q = np.exp(4j * kp * w)
    num = -(k**2 - kp**2) * (q - 1.0)
    den = (k + kp) ** 2 - (k - kp) ** 2 * q
    if np.any(np.abs(den) < DEGENERATE_THRESHOLD):
        raise DegenerateError("reflection denominator vanishes")
    return num / den


def schrodinger_transmission(k: ArrayLike, m: float, v0: float, w: float) -> NDArray:
    """Transmitted amplitude T with |F|^2 + |T|^2 = 1 for real k."""
    k = np.asarray(k, dtype=np.complex128)
    kp = _interior_momentum(k, m, v0)
    q = np.exp(4j * kp * w)
    num = 2.0 * k * kp * np.exp(2j * (kp - k) * w)
    den = k * kp * (q + 1.0) - 0.5 * (k**2 + kp**2) * (q - 1.0)
    if np.any(np.abs(den) < DEGENERATE_THRESHOLD):
        raise DegenerateError("transmission denominator vanishes")
    return num / den


def schrodinger_coeffs(k: ArrayLike, m: float, v0: float, w: float) -> SchrodingerCoeffs:
    """
    Stationary amplitudes for a square potential of signed depth v0.

    Args:
        k: ArrayLike: momenta (real).
        m: float: mass.
        v0: float: signed strength, negative for a well.
        w: float: half width.

    Returns:
        SchrodingerCoeffs: D = 1, E, A as printed, F = E / A and the
            transmission amplitude T.
    """
    k_arr = np.asarray(k, dtype=np.complex128)
    kp = _interior_momentum(k_arr, m, v0)
    with np.errstate(over="ignore", invalid="ignore"):
        E = -2j * (k_arr**2 - kp**2) * np.sin(2 * kp * w)
        A = (k_arr + kp) ** 2 * np.exp(-2j * kp * w) - (k_arr - kp) ** 2 * np.exp(
            2j * kp * w
        )

    scaled = not (np.all(np.isfinite(E)) and np.all(np.isfinite(A)))
    if scaled:
        q = np.exp(4j * kp * w)
        E = -(k_arr**2 - kp**2) * (q - 1.0)
        A = (k_arr + kp) ** 2 - (k_arr - kp) ** 2 * q

    if np.any(np.abs(A) < DEGENERATE_THRESHOLD):
        raise DegenerateError("A(k, k') vanishes")

    return SchrodingerCoeffs(
        k=k_arr.real,
        kprime=kp,
        D=np.ones_like(k_arr),
        E=E,
        A=A,
        F=schrodinger_reflection(k_arr, m, v0, w),
        T=schrodinger_transmission(k_arr, m, v0, w),
        scaled=scaled,
    )


def dirac_coeffs(k: ArrayLike, m: float, v0: float, w: float) -> DiracCoeffs:
    """
    Dirac square-well amplitudes for a scalar potential S = v0 inside |x| < w.

    The mass inside the well is m* = m + v0 (a well of depth V0 has v0 = -V0).
    k' = sqrt(E^2 - m*^2) on the principal branch; channels with E < |m*| are
    evanescent and flagged.
    """
    k_arr = np.asarray(k, dtype=float)
    E = np.sqrt(k_arr**2 + m**2)
    mstar = m + v0
    kp = np.sqrt((E**2 - mstar**2).astype(np.complex128))
    evanescent = E < abs(mstar)
    if np.any(evanescent) and k_arr.ndim == 0:
        logger.warning(f"evanescent Dirac channel at k={float(k_arr):g}")

    # k -> 0 is the total-reflection limit, B = -1
    tiny = np.abs(k_arr) < 1e-300
    k_safe = np.where(tiny, 1.0, k_arr)
    g = kp * (E + m) / (k_safe * (E + mstar))

    e1 = np.exp(1j * k_arr * w)
    e3 = np.exp(1j * kp * w)
    e4 = np.exp(-1j * kp * w)
    Delta = e3**2 * (1 - g) ** 2 - e4**2 * (1 + g) ** 2
    if np.any(np.abs(Delta) < DEGENERATE_THRESHOLD):
        raise DegenerateError("Dirac matching determinant vanishes")

    B = np.where(tiny, -1.0 + 0j, (1 - g**2) * (e3**2 - e4**2) / Delta)
    C = np.where(tiny, 0j, -2 * e1 * e4 * (1 + g) / Delta)
    D = np.where(tiny, 0j, 2 * e1 * e3 * (1 - g) / Delta)
    F = np.where(tiny, 0j, -4 * g / Delta)

    return DiracCoeffs(
        k=k_arr,
        E_rel=E,
        mstar=mstar,
        kprime=kp,
        g=g,
        B=B,
        C=C,
        D=D,
        F=F,
        Delta=Delta,
        evanescent=evanescent,
    )


def dirac_stationary(
    k: float, m: float, v0: float, w: float, x: ArrayLike
) -> tuple[NDArray, NDArray]:
    """Spinor (phi1, phi2) of the stationary state on all three regions."""
    c = dirac_coeffs(k, m, v0, w)
    phase = np.exp(-2j * k * w)
    B, C, D, F = (c.B * phase, c.C * phase, c.D * phase, c.F * phase)
    x = np.asarray(x, dtype=float)
    E = c.E_rel
    r = k / (E + m)
    rp = c.kprime / (E + c.mstar)

    left, right = x < -w, x > w
    inside = ~(left | right)
    phi1 = np.empty(x.shape, dtype=np.complex128)
    phi2 = np.empty(x.shape, dtype=np.complex128)

    xl = x[left]
    phi1[left] = np.exp(1j * k * xl) + B * np.exp(-1j * k * xl)
    phi2[left] = 1j * r * (np.exp(1j * k * xl) - B * np.exp(-1j * k * xl))

    xi = x[inside]
    phi1[inside] = C * np.exp(1j * c.kprime * xi) + D * np.exp(-1j * c.kprime * xi)
    phi2[inside] = 1j * rp * (
        C * np.exp(1j * c.kprime * xi) - D * np.exp(-1j * c.kprime * xi)
    )

    xr = x[right]
    phi1[right] = F * np.exp(1j * k * xr)
    phi2[right] = 1j * r * F * np.exp(1j * k * xr)
    return phi1, phi2


################################################################################
# Free packet and normalization
################################################################################


def packet_normalization(packet: PacketSpec1D) -> float:
    """Constant turning the momentum integral with a(k) = e^{-sigma^2(k-q0)^2} into a unit-norm packet."""
    s = packet.sigma
    return (2 * math.pi * s**2) ** -0.25 * s / math.sqrt(math.pi)


def free_packet(
    packet: PacketSpec1D, x: ArrayLike, t: float, normalized: bool = False
) -> NDArray[np.complex128]:
    """Closed form of the integral of a(k) e^{ik(x-x0) - ik^2 t/2m} over all k."""
    x = np.asarray(x, dtype=float)
    A = packet.sigma**2 + 1j * t / (2 * packet.mass)
    B = 2 * packet.sigma**2 * packet.q0 + 1j * (x - packet.x0)
    psi = np.sqrt(np.pi / A) * np.exp(B**2 / (4 * A) - packet.sigma**2 * packet.q0**2)
    if normalized:
        psi = psi * packet_normalization(packet)
    return psi


################################################################################
# Schrödinger quadrature oracle
################################################################################


def _steepest_descent(amplitude, A: complex, B: NDArray, C: float, nk: int) -> NDArray:
    """
    Integral over real k of amplitude(k) exp(-A k^2 + B k + C), evaluated on
    the line k = B/(2A) + s/sqrt(A) where the exponent is -s^2. Poles of the
    amplitude between this line and the real axis are not picked up.
    """
    s, ws = gauss_quadrature_nodes(
        nk, -STEEPEST_DESCENT_HALF_WIDTH, STEEPEST_DESCENT_HALF_WIDTH
    )
    h = 1.0 / np.sqrt(A)
    kstar = B / (2 * A)
    k = kstar[:, None] + h * s[None, :]
    f = amplitude(k)
    inner = (f * np.exp(-(s**2))[None, :]) @ ws
    return h * np.exp(B**2 / (4 * A) + C) * inner


def _relative_delta(coarse: NDArray, fine: NDArray) -> float:
    scale = np.max(np.abs(fine)) if fine.size else 0.0
    if scale == 0:
        return 0.0
    return float(np.max(np.abs(fine - coarse)) / scale)


def _check_backward(x: NDArray, well: Optional[PotentialSpec]) -> None:
    if well is not None and np.any(x >= -well.w):
        raise ValueError("the stationary expansion holds in the backward region x < -w")


def _schrodinger_integral(packet, well, x, t, nk) -> NDArray[np.complex128]:
    s2 = packet.sigma**2
    A = s2 + 1j * t / (2 * packet.mass)
    C = -s2 * packet.q0**2
    incident = _steepest_descent(
        lambda k: np.ones_like(k), A, 2 * s2 * packet.q0 + 1j * (x - packet.x0), C, nk
    )
    if well is None or well.v0 == 0:
        return incident

    X = x + packet.x0 + 2 * well.w
    reflected = _steepest_descent(
        lambda k: schrodinger_reflection(k, packet.mass, well.v0, well.w),
        A,
        2 * s2 * packet.q0 - 1j * X,
        C,
        nk,
    )
    return incident + reflected


def packet_backward_quadrature(
    packet: PacketSpec1D,
    well: Optional[PotentialSpec],
    x: ArrayLike,
    t: float,
    nk: int = 64,
    tol: float = 1e-8,
) -> NDArray[np.complex128]:
    """
    The packet reflected by a square well, integrated over momentum.

    Args:
        packet: PacketSpec1D: initial packet.
        well: PotentialSpec | None: square well; None gives the free packet.
        x: ArrayLike: positions, all below -w.
        t: float: time.
        nk: int: quadrature order (>= 64); the result at 2 nk is returned.
        tol: float: bound on the relative change between nk and 2 nk.

    Returns:
        ndarray: unnormalized psi(x, t); multiply by packet_normalization for unit norm.

    Raises:
        ConvergenceError: if doubling nk moves the result by more than tol.
    """
    if nk < 64:
        raise ValueError("quadrature order nk must be at least 64")
    _check_square(well)
    x = np.atleast_1d(np.asarray(x, dtype=float))
    _check_backward(x, well)

    coarse = _schrodinger_integral(packet, well, x, t, nk)
    fine = _schrodinger_integral(packet, well, x, t, 2 * nk)
    delta = _relative_delta(coarse, fine)
    if delta > tol:
        raise ConvergenceError("Schrödinger packet quadrature did not converge", delta)
    return fine


################################################################################
# Dirac quadrature oracle
################################################################################


def dirac_momentum_window(packet: PacketSpec1D) -> tuple[float, float]:
    """Momenta where 2 sigma^2 (E E0 - k q0 - m^2) reaches 32, in closed form."""
    m, q0 = packet.mass, packet.q0
    c = DIRAC_WINDOW_EXPONENT / (2 * packet.sigma**2)
    E0 = math.hypot(q0, m)
    spread = E0 * math.sqrt(c * (2 * m**2 + c))
    return (q0 * (m**2 + c) - spread) / m**2, (q0 * (m**2 + c) + spread) / m**2


def _dirac_nodes(packet, well, x, t, nk):
    k_lo, k_hi = dirac_momentum_window(packet)
    width = k_hi - k_lo
    reach = np.max(np.abs(x - packet.x0))
    if well is not None:
        reach = max(reach, np.max(np.abs(x + packet.x0 + 2 * well.w)))
    oscillations = width * (reach + abs(t)) / (2 * np.pi)

    panel_width = 2.0 / packet.sigma
    if well is not None:
        panel_width = min(panel_width, 0.5 / well.w)
    panels = max(1, math.ceil(oscillations / 4), math.ceil(width / panel_width))
    return composite_gauss_nodes(nk, k_lo, k_hi, panels)


def _dirac_integral(packet, well, x, t, nk) -> tuple[NDArray, NDArray]:
    m, s2 = packet.mass, packet.sigma**2
    k, wk = _dirac_nodes(packet, well, x, t, nk)
    E = np.sqrt(k**2 + m**2)
    E0 = math.hypot(packet.q0, m)
    weight = wk * np.exp(-2 * s2 * (E * E0 - k * packet.q0 - m**2) - 1j * E * t)
    lower = 1j * k / (E + m)

    if well is not None and well.v0 != 0:
        B = dirac_coeffs(k, m, well.v0, well.w).B
    else:
        B = None

    U = np.empty(x.shape, dtype=np.complex128)
    V = np.empty(x.shape, dtype=np.complex128)
    for start in range(0, len(x), CHUNK_ROWS):
        xc = x[start : start + CHUNK_ROWS, None]
        incoming = np.exp(1j * k[None, :] * (xc - packet.x0))
        if B is None:
            U[start : start + CHUNK_ROWS] = incoming @ weight
            V[start : start + CHUNK_ROWS] = incoming @ (lower * weight)
            continue
        outgoing = B[None, :] * np.exp(-1j * k[None, :] * (xc + packet.x0 + 2 * well.w))
        U[start : start + CHUNK_ROWS] = (incoming + outgoing) @ weight
        V[start : start + CHUNK_ROWS] = (incoming - outgoing) @ (lower * weight)
    return U, V


def dirac_packet_quadrature(
    packet: PacketSpec1D,
    well: Optional[PotentialSpec],
    x: ArrayLike,
    t: float,
    nk: int = 64,
    tol: float = 1e-8,
    check_convergence: bool = True,
) -> tuple[NDArray[np.complex128], NDArray[np.complex128]]:
    """
    Relativistic minimal-uncertainty packet scattered by a scalar square well,
    integrated over momentum with composite Gauss-Legendre panels. Returns the
    unnormalized spinor components (U, V).
    """
    if nk < 64:
        raise ValueError("quadrature order nk must be at least 64")
    _check_square(well)
    x = np.atleast_1d(np.asarray(x, dtype=float))
    _check_backward(x, well)

    if not check_convergence:
        return _dirac_integral(packet, well, x, t, nk)

    U1, V1 = _dirac_integral(packet, well, x, t, nk)
    U2, V2 = _dirac_integral(packet, well, x, t, 2 * nk)
    delta = max(_relative_delta(U1, U2), _relative_delta(V1, V2))
    if delta > tol:
        raise ConvergenceError("Dirac packet quadrature did not converge", delta)
    return U2, V2
