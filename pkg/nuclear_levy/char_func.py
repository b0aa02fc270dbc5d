"""Characteristic functions, Levy-Khintchine exponents and Poisson-integral moments."""

from __future__ import annotations

import cmath
import logging
from dataclasses import dataclass

import numpy as np

from .const import PSD_FLOOR, SYMMETRY_TOLERANCE
from .exceptions import (
    DimensionError,
    DomainError,
    InfiniteMassError,
    InvalidMeasureError,
    MatrixError,
)
from .levy_measure import (
    LevyMeasureSpec,
    Region,
    first_moment,
    integrate_measure,
    region_mass,
    second_moment,
    validate,
)
from .sequence_space import DualPoint, IndexLike, TestFunction, dual_norms, pairing

LOG = logging.getLogger(__name__)


class CovarianceForm:
    """Symmetric PSD matrix Q acting on test-function coordinates, Q(phi)^2 = phi^T Q phi."""

    __slots__ = ('_matrix',)

    def __init__(self, matrix: np.ndarray | list[list[float]]) -> None:
        array = np.array(matrix, dtype=float)
        if array.ndim != 2 or array.shape[0] != array.shape[1] or array.shape[0] < 1:
            raise DimensionError(f'Covariance must be a square matrix, got shape {array.shape}')
        if not np.all(np.isfinite(array)):
            raise MatrixError('Covariance entries must be finite')
        scale = max(1.0, float(np.max(np.abs(array))))
        if np.max(np.abs(array - array.T)) > SYMMETRY_TOLERANCE * scale:
            raise MatrixError('Covariance matrix is not symmetric')
        smallest = float(np.min(np.linalg.eigvalsh(array)))
        if smallest < PSD_FLOOR * scale:
            raise MatrixError(f'Covariance is not positive semidefinite (eigenvalue {smallest})')
        array.setflags(write=False)
        self._matrix = array

    @classmethod
    def zeros(cls, dim: int) -> CovarianceForm:
        return cls(np.zeros((dim, dim)))

    @classmethod
    def diagonal(cls, values: list[float] | np.ndarray) -> CovarianceForm:
        return cls(np.diag(np.asarray(values, dtype=float)))

    @property
    def matrix(self) -> np.ndarray:
        return self._matrix

    @property
    def dim(self) -> int:
        return int(self._matrix.shape[0])

    @property
    def is_zero(self) -> bool:
        return not np.any(self._matrix)

    def bilinear(self, phi: TestFunction, psi: TestFunction) -> float:
        """Return Q(phi, psi)."""
        if phi.dim != self.dim or psi.dim != self.dim:
            raise DimensionError(f'Covariance of dim {self.dim} applied to dim {phi.dim}/{psi.dim}')
        return float(phi.coords @ self._matrix @ psi.coords)

    def value(self, phi: TestFunction) -> float:
        """Return Q(phi)^2 = Q(phi, phi)."""
        return self.bilinear(phi, phi)

    def scaled(self, factor: float) -> CovarianceForm:
        return CovarianceForm(factor * self._matrix)

    def to_list(self) -> list[list[float]]:
        return [[float(x) for x in row] for row in self._matrix]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, CovarianceForm):
            return NotImplemented
        return bool(np.array_equal(self._matrix, other._matrix))

    def __hash__(self) -> int:
        return hash(self._matrix.tobytes())

    def __repr__(self) -> str:
        return f'CovarianceForm({self.to_list()})'


@dataclass(frozen=True)
class CharTriplet:
    """Characteristics (m, Q, nu, r) of a Levy process on the truncated dual."""

    mean: DualPoint
    cov: CovarianceForm
    levy: LevyMeasureSpec
    r: float = 0.0

    def __post_init__(self) -> None:
        object.__setattr__(self, 'r', float(self.r))
        dims = {self.mean.dim, self.cov.dim, self.levy.dim}
        if len(dims) != 1:
            raise DimensionError(
                f'Triplet dims disagree: mean {self.mean.dim}, cov {self.cov.dim}, '
                f'levy {self.levy.dim}'
            )
        report = validate(self.levy, self.r)
        if not report.valid:
            raise InvalidMeasureError(f'Levy measure does not validate at r={self.r}')

    @property
    def dim(self) -> int:
        return self.mean.dim

    @classmethod
    def zero(cls, dim: int, r: float = 0.0) -> CharTriplet:
        return cls(DualPoint.zeros(dim), CovarianceForm.zeros(dim), LevyMeasureSpec.empty(dim), r)


def _check_time(t: float) -> None:
    if not t >= 0.0:
        raise DomainError(f'Time must be non-negative, got {t}')


def _check_phi(dim: int, phi: TestFunction) -> None:
    if phi.dim != dim:
        raise DimensionError(f'Test function of dim {phi.dim} used with dim {dim} objects')


def _jump_exponent(
    nu: LevyMeasureSpec,
    region: Region,
    phi: TestFunction,
    compensate_within: float | None,
) -> complex:
    """Integrate e^{iy} - 1 - iy 1{rho' <= 1} (y = f[phi]) over region.

    `compensate_within` is the seminorm index of the compensation ball, or None
    for the uncompensated integrand. Cosine terms use -2 sin^2(y/2) so small
    jumps keep their relative accuracy.
    """
    coords = phi.coords

    def integrand(points: np.ndarray) -> np.ndarray:
        y = points @ coords
        imag = np.sin(y)
        if compensate_within is not None:
            imag = imag - y * (dual_norms(points, compensate_within) <= 1.0)
        return -2.0 * np.sin(0.5 * y) ** 2 + 1j * imag

    return complex(integrate_measure(nu, region, integrand, complex_valued=True).value)


def lk_exponent(triplet: CharTriplet, phi: TestFunction) -> complex:
    """Return eta(phi) = i m[phi] - Q(phi)^2/2 + compensated jump integral."""
    _check_phi(triplet.dim, phi)
    drift = 1j * pairing(triplet.mean, phi)
    gauss = -0.5 * triplet.cov.value(phi)
    jumps = _jump_exponent(triplet.levy, Region.whole(triplet.r), phi, triplet.r)
    return drift + gauss + jumps


def cf_levy(triplet: CharTriplet, t: float, phi: TestFunction) -> complex:
    """Return E exp(i L_t[phi]) = exp(t eta(phi))."""
    _check_time(t)
    return cmath.exp(t * lk_exponent(triplet, phi))


def cf_wiener(mean: DualPoint, cov: CovarianceForm, t: float, phi: TestFunction) -> complex:
    """Return exp(i t m[phi] - t Q(phi)^2 / 2)."""
    _check_time(t)
    return cmath.exp(1j * t * pairing(mean, phi) - 0.5 * t * cov.value(phi))


def cf_poisson_integral(
    nu: LevyMeasureSpec, region: Region, t: float, phi: TestFunction
) -> complex:
    """CF of the Poisson integral over region: exp(t int_A (e^{if[phi]} - 1) nu(df))."""
    _check_time(t)
    _check_phi(nu.dim, phi)
    region_mass(nu, region)  # raises InfiniteMassError
    return cmath.exp(t * _jump_exponent(nu, region, phi, None))


def cf_compensated(nu: LevyMeasureSpec, region: Region, t: float, phi: TestFunction) -> complex:
    """CF of the compensated integral: exp(t int_A (e^{if[phi]} - 1 - if[phi]) nu(df)).

    The integrand is O(f[phi]^2) near the origin, so regions inside the unit
    ball are accepted even when nu(A) is infinite.
    """
    _check_time(t)
    _check_phi(nu.dim, phi)
    coords = phi.coords

    def integrand(points: np.ndarray) -> np.ndarray:
        y = points @ coords
        return -2.0 * np.sin(0.5 * y) ** 2 + 1j * (np.sin(y) - y)

    exponent = complex(integrate_measure(nu, region, integrand, complex_valued=True).value)
    return cmath.exp(t * exponent)


def cf_poisson_measure(mu: LevyMeasureSpec, phi: TestFunction) -> complex:
    """Return exp(-(mu^(0) - mu^(phi))) for a finite measure mu."""
    _check_phi(mu.dim, phi)
    if not mu.is_finite:
        raise InfiniteMassError('Poisson measure needs a finite measure')
    points, masses = mu.point_masses
    if not masses.size:
        return 1.0 + 0.0j
    y = points @ phi.coords
    exponent = np.sum(masses * (-2.0 * np.sin(0.5 * y) ** 2 + 1j * np.sin(y)))
    return cmath.exp(complex(exponent))


def nth_root_triplet(triplet: CharTriplet, n: int) -> CharTriplet:
    """Return (m/n, Q/n, nu/n, r), the triplet of the n-th convolution root."""
    if isinstance(n, bool) or not isinstance(n, int | np.integer) or n < 1:
        raise DomainError(f'Root order must be a positive integer, got {n}')
    if n == 1:
        return triplet
    factor = 1.0 / n
    return CharTriplet(
        mean=triplet.mean.scaled(factor),
        cov=triplet.cov.scaled(factor),
        levy=triplet.levy.scaled(factor),
        r=triplet.r,
    )


def moments_poisson_integral(
    nu: LevyMeasureSpec, region: Region, t: float, phi: TestFunction
) -> tuple[float, float]:
    """Return (t int_A f[phi] nu(df), t int_A f[phi]^2 nu(df))."""
    _check_time(t)
    _check_phi(nu.dim, phi)
    mean = pairing(first_moment(nu, region), phi)  # raises NonIntegrableError
    coords = phi.coords

    def squared(points: np.ndarray) -> np.ndarray:
        return (points @ coords) ** 2

    variance = float(integrate_measure(nu, region, squared))
    return t * mean, t * variance


def small_ball_seminorm_sq(nu: LevyMeasureSpec, r: IndexLike, phi: TestFunction) -> float:
    """Return q(phi)^2 = int_{B_rho'(1)} f[phi]^2 nu(df)."""
    _check_phi(nu.dim, phi)
    coords = phi.coords

    def squared(points: np.ndarray) -> np.ndarray:
        return (points @ coords) ** 2

    return float(integrate_measure(nu, Region.ball(1.0, r), squared))


def second_moment_small_jumps(
    nu: LevyMeasureSpec, r: IndexLike, t: float, phi: TestFunction
) -> float:
    """Return E M_t[phi]^2 = t int_{B_rho'(1)} f[phi]^2 nu(df)."""
    _check_time(t)
    return t * small_ball_seminorm_sq(nu, r, phi)


def hilbert_second_moment(nu: LevyMeasureSpec, r: IndexLike, q: IndexLike, t: float) -> float:
    """Return t int_{B_rho'(1)} q'(f)^2 nu(df)."""
    _check_time(t)
    return t * float(second_moment(nu, Region.ball(1.0, r), q))


def covariance(
    cov: CovarianceForm, s: float, t: float, phi: TestFunction, psi: TestFunction
) -> float:
    """Return E W_s[phi] W_t[psi] = (s ^ t) Q(phi, psi)."""
    _check_time(s)
    _check_time(t)
    return min(s, t) * cov.bilinear(phi, psi)


def decomposition_factors(triplet: CharTriplet, t: float, phi: TestFunction) -> dict[str, complex]:
    """CF factors of drift, Wiener, compensated small jumps and large jumps at time t."""
    _check_time(t)
    ball = Region.ball(1.0, triplet.r)
    factors = {
        'drift': cmath.exp(1j * t * pairing(triplet.mean, phi)),
        'wiener': cf_wiener(DualPoint.zeros(triplet.dim), triplet.cov, t, phi),
        'small': cf_compensated(triplet.levy, ball, t, phi),
        'large': cf_poisson_integral(triplet.levy, Region.complement(1.0, triplet.r), t, phi),
    }
    LOG.debug(f'Decomposition factors at t={t}: {factors}')
    return factors
