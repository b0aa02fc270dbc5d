"""Truncated sequence model of a nuclear space and its dual.

Elements of Phi are Hermite coefficient vectors phi of length D, elements of
Phi' are coordinate vectors f of the same length, and the pairing is the dot
product f[phi] = sum f_n phi_n. The Hilbertian seminorms are the diagonal
family

    p_r(phi)^2 = sum_{n<D} (1+n)^(2r) phi_n^2

with dual norms p_r'(f)^2 = sum_{n<D} (1+n)^(-2r) f_n^2. Every inclusion
between the completions is diagonal, so operator and Hilbert-Schmidt norms are
closed form.
"""

from __future__ import annotations

from typing import TypeAlias

import logging
import math
from collections.abc import Iterable
from dataclasses import dataclass

import numpy as np

from .exceptions import DimensionError, InvalidParameterError, OrderingError

LOG = logging.getLogger(__name__)


class _CoordinateVector:
    """Immutable finite real vector shared by test functions and dual points."""

    __slots__ = ('_coords',)

    def __init__(self, coords: Iterable[float] | np.ndarray) -> None:
        array = np.array(coords, dtype=float).reshape(-1)
        if array.size < 1:
            raise DimensionError(f'{type(self).__name__} needs at least one coordinate')
        if not np.all(np.isfinite(array)):
            raise InvalidParameterError(f'{type(self).__name__} coordinates must be finite')
        array.setflags(write=False)
        self._coords = array

    @property
    def coords(self) -> np.ndarray:
        return self._coords

    @property
    def dim(self) -> int:
        return int(self._coords.size)

    def to_list(self) -> list[float]:
        return [float(x) for x in self._coords]

    def __len__(self) -> int:
        return self.dim

    def __eq__(self, other: object) -> bool:
        if type(other) is not type(self):
            return NotImplemented
        return bool(np.array_equal(self._coords, other._coords))  # type: ignore[attr-defined]

    def __hash__(self) -> int:
        return hash((type(self).__name__, self._coords.tobytes()))

    def __repr__(self) -> str:
        return f'{type(self).__name__}({self.to_list()})'


class TestFunction(_CoordinateVector):
    """Element phi of Phi, given by its first D Hermite coefficients."""

    __slots__ = ()
    __test__ = False  # keep pytest from collecting this class

    def __neg__(self) -> TestFunction:
        return TestFunction(-self.coords)

    def scaled(self, factor: float) -> TestFunction:
        return TestFunction(factor * self.coords)

    def __add__(self, other: TestFunction) -> TestFunction:
        _check_dims(self, other)
        return TestFunction(self.coords + other.coords)

    @classmethod
    def zeros(cls, dim: int) -> TestFunction:
        return cls(np.zeros(dim))

    @classmethod
    def basis(cls, n: int, dim: int) -> TestFunction:
        coords = np.zeros(dim)
        coords[n] = 1.0
        return cls(coords)


class DualPoint(_CoordinateVector):
    """Element f of Phi', acting on test functions through the pairing."""

    __slots__ = ()

    def __neg__(self) -> DualPoint:
        return DualPoint(-self.coords)

    def scaled(self, factor: float) -> DualPoint:
        return DualPoint(factor * self.coords)

    def __add__(self, other: DualPoint) -> DualPoint:
        _check_dims(self, other)
        return DualPoint(self.coords + other.coords)

    @classmethod
    def zeros(cls, dim: int) -> DualPoint:
        return cls(np.zeros(dim))

    @classmethod
    def basis(cls, n: int, dim: int) -> DualPoint:
        coords = np.zeros(dim)
        coords[n] = 1.0
        return cls(coords)


@dataclass(frozen=True)
class SeminormIndex:
    """Exponent r selecting the seminorm p_r of the weighted family."""

    r: float

    def __post_init__(self) -> None:
        if not math.isfinite(self.r):
            raise InvalidParameterError(f'Seminorm index must be finite, got {self.r}')

    def __float__(self) -> float:
        return float(self.r)


@dataclass(frozen=True)
class HilbertSchmidtNorm:
    """Squared HS norm of a truncated inclusion plus the untruncated verdict."""

    value: float
    converges: bool


IndexLike: TypeAlias = SeminormIndex | float


def _index(r: IndexLike) -> float:
    value = float(r)
    if not math.isfinite(value):
        raise InvalidParameterError(f'Seminorm index must be finite, got {value}')
    return value


def _check_dims(a: _CoordinateVector, b: _CoordinateVector) -> None:
    if a.dim != b.dim:
        raise DimensionError(f'Dimension mismatch: {a.dim} != {b.dim}')


def weights(r: IndexLike, dim: int) -> np.ndarray:
    """Return the seminorm weights (1+n)^r for n < dim."""
    return np.arange(1, dim + 1, dtype=float) ** _index(r)


def seminorm(phi: TestFunction, r: IndexLike) -> float:
    """Return p_r(phi)."""
    return float(np.linalg.norm(weights(r, phi.dim) * phi.coords))


def dual_norm(f: DualPoint, r: IndexLike) -> float:
    """Return p_r'(f), the operator norm of f over the unit ball of p_r."""
    return float(np.linalg.norm(f.coords / weights(r, f.dim)))


def dual_norms(points: np.ndarray, r: IndexLike) -> np.ndarray:
    """Vectorized dual norm over the rows of a (M, D) array of dual coordinates."""
    points = np.atleast_2d(points)
    return np.linalg.norm(points / weights(r, points.shape[1]), axis=1)


def pairing(f: DualPoint, phi: TestFunction) -> float:
    """Return the canonical pairing f[phi]."""
    if f.dim != phi.dim:
        raise DimensionError(f'Cannot pair dim {f.dim} dual point with dim {phi.dim} test function')
    return float(np.dot(f.coords, phi.coords))


def dual_maximizer(f: DualPoint, r: IndexLike) -> TestFunction:
    """Return the test function of unit p_r-seminorm attaining the dual norm of f.

    The maximizer is phi_n proportional to (1+n)^(-2r) f_n. For f = 0 the zero
    vector is returned.
    """
    norm = dual_norm(f, r)
    if norm == 0.0:
        return TestFunction.zeros(f.dim)
    return TestFunction(f.coords / weights(r, f.dim) ** 2 / norm)


def op_norm(r: IndexLike, s: IndexLike, dim: int) -> float:
    """Operator norm of the diagonal inclusion i_{p_r,p_s} (largest weight)."""
    r_value, s_value = _index(r), _index(s)
    if s_value < r_value:
        raise OrderingError(f'Inclusion needs s >= r, got r={r_value}, s={s_value}')
    return float(np.max(weights(r_value - s_value, dim)))


def hs_norm_sq(r: IndexLike, s: IndexLike, dim: int) -> HilbertSchmidtNorm:
    """Squared Hilbert-Schmidt norm of i_{p_r,p_s} at truncation dim.

    The untruncated series sum (1+n)^(2(r-s)) converges iff 2(s-r) > 1.
    """
    r_value, s_value = _index(r), _index(s)
    if s_value < r_value:
        raise OrderingError(f'Inclusion needs s >= r, got r={r_value}, s={s_value}')
    if dim < 1:
        raise DimensionError(f'Truncation must be at least 1, got {dim}')
    value = float(np.sum(weights(2.0 * (r_value - s_value), dim)))
    converges = 2.0 * (s_value - r_value) > 1.0
    LOG.debug(f'HS norm^2 of i({r_value},{s_value}) at D={dim}: {value} (converges={converges})')
    return HilbertSchmidtNorm(value=value, converges=converges)
