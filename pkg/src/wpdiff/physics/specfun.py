"""
Special functions and low-level kernels shared by the physics modules.

The complex error function is evaluated through the Faddeeva function
w(z) = exp(-z^2) erfc(-iz) from scipy, which stays accurate for arguments
with large mixed real and imaginary parts. Linear systems coming from the
implicit evolvers are solved in banded storage with LAPACK.
"""

from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy import linalg, special

from src.wpdiff.physics.errors import OverflowRangeError, PoleError, SingularPivotError

ERFC_ARGUMENT_LIMIT = 1e8
BESSEL_MAX_ORDER = 10
BESSEL_ZERO_THRESHOLD = 1e-12


def erfc_complex(z: ArrayLike) -> NDArray[np.complex128] | complex:
    """
    Complementary error function of a complex argument.

    For Re z >= 0 the value is exp(-z^2) w(iz); the left half plane uses the
    reflection erfc(z) = 2 - erfc(-z) so that both branches come from the
    well conditioned side of the Faddeeva function.

    Args:
        z: ArrayLike: scalar or array of complex arguments.

    Returns:
        complex or ndarray: erfc(z).

    Raises:
        OverflowRangeError: if |z| >= 1e8 or the value is not representable.
    """
    z_arr = np.asarray(z, dtype=np.complex128)
    if np.any(np.abs(z_arr) >= ERFC_ARGUMENT_LIMIT):
        raise OverflowRangeError(
            f"erfc argument beyond {ERFC_ARGUMENT_LIMIT:g}; use the asymptotic limit"
        )

    right = z_arr.real >= 0
    zr = np.where(right, z_arr, -z_arr)
    with np.errstate(over="ignore", invalid="ignore"):
        half = np.exp(-(zr**2)) * special.wofz(1j * zr)
        value = np.where(right, half, 2.0 - half)

    if not np.all(np.isfinite(value)):
        raise OverflowRangeError("erfc value exceeds the representable range")

    return value[()] if value.ndim == 0 else value


def scaled_erfc(z: ArrayLike) -> NDArray[np.complex128] | complex:
    """exp(z^2) erfc(z) without forming either factor separately."""
    z_arr = np.asarray(z, dtype=np.complex128)
    with np.errstate(over="ignore", invalid="ignore"):
        value = special.wofz(1j * z_arr)
    if not np.all(np.isfinite(value)):
        raise OverflowRangeError("scaled erfc exceeds the representable range")
    return value[()] if value.ndim == 0 else value


def spherical_bessel_j(l: int, z: ArrayLike) -> NDArray[np.complex128] | complex:
    """
    Spherical Bessel function j_l for complex arguments, 0 <= l <= 10.

    Raises:
        ValueError: for orders outside 0..10.
        OverflowRangeError: when a large imaginary part overflows.
    """
    if not 0 <= l <= BESSEL_MAX_ORDER:
        raise ValueError(f"spherical Bessel order must be in 0..{BESSEL_MAX_ORDER}")

    z_arr = np.asarray(z, dtype=np.complex128)
    with np.errstate(over="ignore", invalid="ignore"):
        value = special.spherical_jn(l, z_arr)

    if not np.all(np.isfinite(value)):
        raise OverflowRangeError(f"j_{l} overflows for the given argument")

    return value[()] if value.ndim == 0 else value


def bessel_log_derivative(l: int, x: float) -> float:
    """
    z_l = x j_l'(x) / j_l(x) for real x; equals x cot(x) - 1 when l = 0.

    Raises:
        PoleError: if x sits on a zero of j_l.
    """
    jl = special.spherical_jn(l, x)
    if abs(jl) < BESSEL_ZERO_THRESHOLD:
        raise PoleError(f"j_{l}({x}) vanishes; logarithmic derivative has a pole")
    return float(x * special.spherical_jn(l, x, derivative=True) / jl)


@dataclass(frozen=True)
class TridiagonalSystem:
    lower: NDArray[np.complex128]
    diag: NDArray[np.complex128]
    upper: NDArray[np.complex128]
    rhs: NDArray[np.complex128]

    def __post_init__(self):
        n = len(self.diag)
        if len(self.lower) != n - 1 or len(self.upper) != n - 1:
            raise ValueError("lower and upper bands must have length n - 1")
        if len(self.rhs) != n:
            raise ValueError("right-hand side must have length n")

    def banded(self) -> NDArray[np.complex128]:
        n = len(self.diag)
        ab = np.zeros((3, n), dtype=np.complex128)
        ab[0, 1:] = self.upper
        ab[1, :] = self.diag
        ab[2, :-1] = self.lower
        return ab

    def apply(self, x: NDArray[np.complex128]) -> NDArray[np.complex128]:
        y = self.diag * x
        y[:-1] += self.upper * x[1:]
        y[1:] += self.lower * x[:-1]
        return y


def solve_tridiagonal(system: TridiagonalSystem) -> NDArray[np.complex128]:
    """
    Solve a tridiagonal system; the inputs are left untouched.

    Raises:
        SingularPivotError: if LAPACK reports a zero pivot.
    """
    try:
        return linalg.solve_banded(
            (1, 1), system.banded(), np.array(system.rhs, dtype=np.complex128)
        )
    except linalg.LinAlgError as e:
        raise SingularPivotError(f"tridiagonal solve failed: {e}")


@dataclass(frozen=True)
class BlockTridiagonalSystem:
    """
    Tridiagonal system with 2x2 blocks, unknowns interleaved as
    [U0, V0, U1, V1, ...]. Block rows are given as arrays of shape (n, 2, 2)
    for the diagonal and (n - 1, 2, 2) for the off-diagonals.
    """

    lower: NDArray[np.complex128]
    diag: NDArray[np.complex128]
    upper: NDArray[np.complex128]
    rhs: NDArray[np.complex128]

    def __post_init__(self):
        n = self.diag.shape[0]
        if self.diag.shape != (n, 2, 2):
            raise ValueError("diagonal blocks must have shape (n, 2, 2)")
        if self.lower.shape != (n - 1, 2, 2) or self.upper.shape != (n - 1, 2, 2):
            raise ValueError("off-diagonal blocks must have shape (n - 1, 2, 2)")
        if self.rhs.shape != (2 * n,):
            raise ValueError("right-hand side must have length 2n")

    def banded(self) -> NDArray[np.complex128]:
        n = self.diag.shape[0]
        size = 2 * n
        ab = np.zeros((7, size), dtype=np.complex128)

        def put(row_idx, col_idx, values):
            ab[3 + row_idx - col_idx, col_idx] = values

        i = np.arange(n)
        for a in range(2):
            for b in range(2):
                put(2 * i + a, 2 * i + b, self.diag[:, a, b])

        j = np.arange(n - 1)
        for a in range(2):
            for b in range(2):
                put(2 * j + a, 2 * (j + 1) + b, self.upper[:, a, b])
                put(2 * (j + 1) + a, 2 * j + b, self.lower[:, a, b])
        return ab


def solve_banded_matrix(
    bandwidths: tuple[int, int], ab: NDArray, rhs: NDArray
) -> NDArray[np.complex128]:
    """Solve with a banded matrix prepared once and reused across many right-hand sides."""
    try:
        return linalg.solve_banded(bandwidths, ab, rhs, check_finite=False)
    except linalg.LinAlgError as e:
        raise SingularPivotError(f"banded solve failed: {e}")


def solve_block_tridiagonal(system: BlockTridiagonalSystem) -> NDArray[np.complex128]:
    return solve_banded_matrix(
        (3, 3), system.banded(), np.array(system.rhs, dtype=np.complex128)
    )


def gauss_quadrature_nodes(
    n: int, a: float, b: float
) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    """
    Gauss-Legendre nodes and weights on [a, b].

    Args:
        n: int: number of nodes, at least 2.
        a: float: lower limit.
        b: float: upper limit, strictly greater than a.

    Returns:
        tuple: (nodes, weights).
    """
    if n < 2:
        raise ValueError("quadrature needs at least two nodes")
    if not a < b:
        raise ValueError(f"quadrature interval [{a}, {b}] is empty or reversed")

    t, wt = np.polynomial.legendre.leggauss(n)
    half = 0.5 * (b - a)
    return half * t + 0.5 * (a + b), half * wt


def composite_gauss_nodes(
    n: int, a: float, b: float, panels: int
) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    """Gauss-Legendre rule of order n repeated on equal panels of [a, b]."""
    if panels < 1:
        raise ValueError("at least one panel is required")
    t, wt = gauss_quadrature_nodes(n, -1.0, 1.0)
    edges = np.linspace(a, b, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    nodes = (mid[:, None] + half[:, None] * t[None, :]).ravel()
    weights = (half[:, None] * wt[None, :]).ravel()
    return nodes, weights
