"""Levy measures on the truncated dual.

A measure is a finite list of atoms in Phi' plus one-dimensional parts
supported on coordinate axes: power-law densities c|x|^(-1-alpha) on
0 < |x| <= x_max, or finite lists of axis atoms. Along axis n the dual norm
of x e_n is |x| (1+n)^(-r), so every integral over a radial region reduces
to a closed form or a one dimensional quadrature.
"""

from __future__ import annotations

from typing import TypeAlias

import logging
import math
from collections.abc import Callable
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy import integrate

from .const import QUAD_EPSABS, QUAD_EPSREL, QUAD_LIMIT
from .exceptions import (
    DimensionError,
    EmptyRegionError,
    InfiniteMassError,
    InvalidMeasureError,
    InvalidParameterError,
    NonIntegrableError,
)
from .sequence_space import DualPoint, IndexLike, dual_norms
from .state import ValidationReport

LOG = logging.getLogger(__name__)

SIDES: dict[str, tuple[float, ...]] = {
    'positive': (1.0,),
    'negative': (-1.0,),
    'symmetric': (1.0, -1.0),
}

REGION_KINDS = ('ball', 'complement', 'shell', 'whole')

Integrand: TypeAlias = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class Atom:
    """Point mass of intensity `mass` at a nonzero dual point."""

    point: DualPoint
    mass: float


@dataclass(frozen=True)
class PowerLawAxis:
    """Density c|x|^(-1-alpha) on 0 < |x| <= x_max along axis n."""

    n: int
    c: float
    alpha: float
    x_max: float
    side: str = 'positive'

    def __post_init__(self) -> None:
        if not (math.isfinite(self.c) and self.c > 0):
            raise InvalidMeasureError(f'Power-law intensity must be positive, got c={self.c}')
        if not 0.0 < self.alpha < 2.0:
            raise InvalidParameterError(f'Power-law alpha must lie in (0, 2), got {self.alpha}')
        if not (math.isfinite(self.x_max) and self.x_max > 0):
            raise InvalidParameterError(f'Power-law x_max must be positive, got {self.x_max}')
        if self.side not in SIDES:
            raise InvalidParameterError(f"Unknown side '{self.side}'. Supported: {list(SIDES)}")

    @property
    def signs(self) -> tuple[float, ...]:
        return SIDES[self.side]

    def band_mass(self, a: float, b: float) -> float:
        """Mass of (a, b] on one half-line; infinite when a == 0."""
        if a <= 0.0:
            return math.inf
        return self.c / self.alpha * (a ** (-self.alpha) - b ** (-self.alpha))

    def band_moment(self, k: int, a: float, b: float) -> float:
        """Return c * integral_a^b x^(k-1-alpha) dx on one half-line."""
        power = k - self.alpha
        if a <= 0.0 and power <= 0.0:
            return math.inf
        if power == 0.0:
            return self.c * math.log(b / a)
        return self.c * (b**power - a**power) / power

    def inverse_cdf(self, u: np.ndarray, a: float, b: float) -> np.ndarray:
        """Map u in (0, 1] to (a, b] with density proportional to x^(-1-alpha)."""
        lo, hi = a ** (-self.alpha), b ** (-self.alpha)
        return (lo - u * (lo - hi)) ** (-1.0 / self.alpha)


@dataclass(frozen=True)
class AtomicAxis:
    """Finite list of atoms (x_j, c_j) placed at x_j e_n."""

    n: int
    atoms: tuple[tuple[float, float], ...]

    def __post_init__(self) -> None:
        for x, c in self.atoms:
            if not (math.isfinite(x) and math.isfinite(c)):
                raise InvalidMeasureError(f'Axis {self.n} atom ({x}, {c}) is not finite')
            if x == 0.0:
                raise InvalidMeasureError(f'Axis {self.n} carries an atom at the origin')
            if c <= 0.0:
                raise InvalidMeasureError(f'Axis {self.n} atom at {x} has non-positive mass {c}')


AxisPart: TypeAlias = PowerLawAxis | AtomicAxis


@dataclass(frozen=True)
class LevyMeasureSpec:
    """Atomic plus axis-supported Levy measure on Phi' truncated at `dim`."""

    dim: int
    atoms: tuple[Atom, ...] = ()
    axes: tuple[AxisPart, ...] = ()

    def __post_init__(self) -> None:
        self.check()

    def check(self) -> None:
        """Raise if a structural condition of the measure is violated."""
        if self.dim < 1:
            raise DimensionError(f'Truncation must be at least 1, got {self.dim}')
        for atom in self.atoms:
            if atom.point.dim != self.dim:
                raise DimensionError(f'Atom of dim {atom.point.dim} in a dim {self.dim} measure')
            if not np.any(atom.point.coords):
                raise InvalidMeasureError('Levy measure carries an atom at the origin')
            if not (math.isfinite(atom.mass) and atom.mass > 0):
                raise InvalidMeasureError(f'Atom mass must be positive, got {atom.mass}')
        seen: set[int] = set()
        for axis in self.axes:
            if not 0 <= axis.n < self.dim:
                raise InvalidMeasureError(f'Axis index {axis.n} outside 0..{self.dim - 1}')
            if axis.n in seen:
                raise InvalidMeasureError(f'Axis index {axis.n} listed twice')
            seen.add(axis.n)

    @classmethod
    def empty(cls, dim: int) -> LevyMeasureSpec:
        return cls(dim=dim)

    @cached_property
    def point_masses(self) -> tuple[np.ndarray, np.ndarray]:
        """All point masses (free atoms and axis atoms) as ((M, D) points, (M,) masses)."""
        points: list[np.ndarray] = [atom.point.coords for atom in self.atoms]
        masses: list[float] = [atom.mass for atom in self.atoms]
        for axis in self.axes:
            if isinstance(axis, AtomicAxis):
                for x, c in axis.atoms:
                    coords = np.zeros(self.dim)
                    coords[axis.n] = x
                    points.append(coords)
                    masses.append(c)
        if not points:
            return np.zeros((0, self.dim)), np.zeros(0)
        return np.vstack(points), np.array(masses, dtype=float)

    @property
    def power_axes(self) -> list[PowerLawAxis]:
        return [axis for axis in self.axes if isinstance(axis, PowerLawAxis)]

    @property
    def is_finite(self) -> bool:
        """True when the total mass is finite (no power-law parts)."""
        return not self.power_axes

    @property
    def total_mass(self) -> float:
        if not self.is_finite:
            return math.inf
        return float(np.sum(self.point_masses[1]))

    def scaled(self, factor: float) -> LevyMeasureSpec:
        """Return factor * nu."""
        if not (math.isfinite(factor) and factor > 0):
            raise InvalidParameterError(f'Scale factor must be positive, got {factor}')
        atoms = tuple(Atom(point=a.point, mass=a.mass * factor) for a in self.atoms)
        axes: list[AxisPart] = []
        for axis in self.axes:
            if isinstance(axis, PowerLawAxis):
                axes.append(
                    PowerLawAxis(axis.n, axis.c * factor, axis.alpha, axis.x_max, axis.side)
                )
            else:
                axes.append(AtomicAxis(axis.n, tuple((x, c * factor) for x, c in axis.atoms)))
        return LevyMeasureSpec(dim=self.dim, atoms=atoms, axes=tuple(axes))


@dataclass(frozen=True)
class Region:
    """Radial region of Phi' measured with the dual norm of index r.

    ball: rho' <= radius; complement: rho' > radius; shell: lo < rho' <= hi;
    whole: all of Phi' minus the origin.
    """

    kind: str
    r: float = 0.0
    lo: float = 0.0
    hi: float = math.inf

    def __post_init__(self) -> None:
        if self.kind not in REGION_KINDS:
            raise InvalidParameterError(f"Unknown region '{self.kind}'. Supported: {REGION_KINDS}")
        if not math.isfinite(self.r):
            raise InvalidParameterError(f'Region index must be finite, got {self.r}')
        if not (0.0 <= self.lo < self.hi):
            raise InvalidParameterError(f'Region needs 0 <= lo < hi, got ({self.lo}, {self.hi}]')
        if self.kind == 'ball' and (self.lo != 0.0 or not math.isfinite(self.hi)):
            raise InvalidParameterError('Ball needs a finite positive radius')
        if self.kind == 'complement' and (self.lo <= 0.0 or math.isfinite(self.hi)):
            raise InvalidParameterError('Complement needs a positive radius')

    @classmethod
    def ball(cls, radius: float = 1.0, r: IndexLike = 0.0) -> Region:
        return cls('ball', float(r), 0.0, radius)

    @classmethod
    def complement(cls, radius: float = 1.0, r: IndexLike = 0.0) -> Region:
        return cls('complement', float(r), radius, math.inf)

    @classmethod
    def shell(cls, lo: float, hi: float, r: IndexLike = 0.0) -> Region:
        return cls('shell', float(r), lo, hi)

    @classmethod
    def whole(cls, r: IndexLike = 0.0) -> Region:
        return cls('whole', float(r), 0.0, math.inf)

    @property
    def radius(self) -> float:
        return self.hi if self.kind == 'ball' else self.lo

    @property
    def bounded_below(self) -> bool:
        """True when the closure of the region avoids the origin."""
        return self.lo > 0.0

    def contains(self, rho: np.ndarray) -> np.ndarray:
        """Membership mask for dual norms rho (index self.r)."""
        rho = np.asarray(rho, dtype=float)
        return (rho > self.lo) & (rho <= self.hi)

    def axis_band(self, n: int, x_max: float) -> tuple[float, float] | None:
        """Band (a, b] of |x| such that x e_n lies in the region, clipped at x_max."""
        scale = (1.0 + n) ** self.r  # rho'(x e_n) = |x| / scale
        a = self.lo * scale
        b = min(self.hi * scale, x_max)
        if b <= a:
            return None
        return a, b


@dataclass(frozen=True)
class IntegralEstimate:
    """Integral value with accumulated absolute quadrature error."""

    value: complex | float
    abserr: float = 0.0

    def __float__(self) -> float:
        return float(np.real(self.value))

    def __complex__(self) -> complex:
        return complex(self.value)


@dataclass(frozen=True)
class Shell:
    """One dyadic shell of the unit ball with its mass and moments."""

    region: Region
    mass: float
    compensator: DualPoint
    second_moment: float


@dataclass(frozen=True)
class ShellDecomposition:
    """Dyadic shells S_k plus the second moment left below the last shell."""

    r: float
    shells: tuple[Shell, ...]
    residual: float
    abserr: float = 0.0
    masses: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, 'masses', np.array([s.mass for s in self.shells]))

    @property
    def compensators(self) -> np.ndarray:
        """Stacked compensators b_k as a (K, D) array."""
        return np.vstack([s.compensator.coords for s in self.shells])


def _quad_pieces(
    func: Callable[[float], float], a: float, b: float, breaks: tuple[float, ...]
) -> tuple[float, float]:
    edges = [a, *sorted(x for x in breaks if a < x < b), b]
    value, abserr = 0.0, 0.0
    for lo, hi in zip(edges[:-1], edges[1:], strict=True):
        piece, err = integrate.quad(
            func, lo, hi, epsabs=QUAD_EPSABS, epsrel=QUAD_EPSREL, limit=QUAD_LIMIT
        )
        value += piece
        abserr += err
    return value, abserr


def integrate_measure(
    nu: LevyMeasureSpec,
    region: Region,
    integrand: Integrand,
    *,
    complex_valued: bool = False,
) -> IntegralEstimate:
    """Integrate `integrand` over `region` against nu.

    The integrand maps an (M, D) array of dual points to M values. Point masses
    are summed in closed form; power-law axes use adaptive quadrature per unit
    intensity, split where the dual norm of the region's index crosses 1.
    """
    points, masses = nu.point_masses
    total: complex = 0.0
    abserr = 0.0

    if masses.size:
        mask = region.contains(dual_norms(points, region.r))
        if np.any(mask):
            values = np.asarray(integrand(points[mask]))
            total += complex(np.sum(masses[mask] * values))

    for axis in nu.power_axes:
        band = region.axis_band(axis.n, axis.x_max)
        if band is None:
            continue
        a, b = band
        cap = (1.0 + axis.n) ** region.r  # |x| where rho' = 1
        for sign in axis.signs:

            def density(x: float, sign: float = sign, axis: PowerLawAxis = axis) -> complex:
                point = np.zeros((1, nu.dim))
                point[0, axis.n] = sign * x
                return complex(np.asarray(integrand(point))[0]) * x ** (-1.0 - axis.alpha)

            re, re_err = _quad_pieces(lambda x: density(x).real, a, b, (cap,))
            total += axis.c * re
            abserr += axis.c * re_err
            if complex_valued:
                im, im_err = _quad_pieces(lambda x: density(x).imag, a, b, (cap,))
                total += 1j * axis.c * im
                abserr += axis.c * im_err

    if complex_valued:
        return IntegralEstimate(complex(total), abserr)
    return IntegralEstimate(float(np.real(total)), abserr)


def integrability_functional(nu: LevyMeasureSpec, r: IndexLike) -> IntegralEstimate:
    """Return the integral of (rho'(f)^2 ^ 1) against nu."""

    def capped(points: np.ndarray) -> np.ndarray:
        return np.minimum(dual_norms(points, r) ** 2, 1.0)

    return integrate_measure(nu, Region.whole(r), capped)


def second_moment(
    nu: LevyMeasureSpec, region: Region, q: IndexLike | None = None
) -> IntegralEstimate:
    """Return the integral of q'(f)^2 over region (q defaults to the region index)."""
    index = region.r if q is None else float(q)

    def squared(points: np.ndarray) -> np.ndarray:
        return dual_norms(points, index) ** 2

    return integrate_measure(nu, region, squared)


def region_mass(nu: LevyMeasureSpec, region: Region) -> float:
    """Return nu(region); raise InfiniteMassError when the mass diverges."""
    points, masses = nu.point_masses
    total = 0.0
    if masses.size:
        mask = region.contains(dual_norms(points, region.r))
        total += float(np.sum(masses[mask]))
    for axis in nu.power_axes:
        band = region.axis_band(axis.n, axis.x_max)
        if band is None:
            continue
        mass = axis.band_mass(*band) * len(axis.signs)
        if math.isinf(mass):
            raise InfiniteMassError(
                f'Region {region.kind} is not bounded below and axis {axis.n} has infinite mass'
            )
        total += mass
    return total


def complement_mass(nu: LevyMeasureSpec, r: IndexLike, eps: float) -> float:
    """Return nu(B_rho'(eps)^c), finite for every 0 < eps <= 1."""
    if not 0.0 < eps <= 1.0:
        raise InvalidParameterError(f'Radius must lie in (0, 1], got {eps}')
    return region_mass(nu, Region.complement(eps, r))


def first_moment(nu: LevyMeasureSpec, region: Region) -> DualPoint:
    """Return the coordinatewise integral of f over region."""
    points, masses = nu.point_masses
    total = np.zeros(nu.dim)
    if masses.size:
        mask = region.contains(dual_norms(points, region.r))
        if np.any(mask):
            total += masses[mask] @ points[mask]
    for axis in nu.power_axes:
        band = region.axis_band(axis.n, axis.x_max)
        if band is None:
            continue
        moment = axis.band_moment(1, *band)
        if math.isinf(moment):
            raise NonIntegrableError(
                f'First moment of axis {axis.n} (alpha={axis.alpha}) diverges near the origin'
            )
        total[axis.n] += sum(axis.signs) * moment
    return DualPoint(total)


def first_moment_finite(nu: LevyMeasureSpec, region: Region) -> bool:
    """True when the integral of |f| over region is finite."""
    for axis in nu.power_axes:
        band = region.axis_band(axis.n, axis.x_max)
        if band is not None and math.isinf(axis.band_moment(1, *band)):
            return False
    return True


def validate(nu: LevyMeasureSpec, r: IndexLike) -> ValidationReport:
    """Check the Levy measure conditions at seminorm index r."""
    nu.check()
    r_value = float(r)
    small_ball = second_moment(nu, Region.ball(1.0, r_value))
    tail_mass = region_mass(nu, Region.complement(1.0, r_value))
    value = float(small_ball)
    valid = math.isfinite(value) and math.isfinite(tail_mass)
    LOG.debug(f'Validated measure at r={r_value}: small-ball moment {value}, tail {tail_mass}')
    return ValidationReport(
        r=r_value,
        origin_mass=0.0,
        small_ball_moment=value,
        tail_mass=tail_mass,
        abserr=small_ball.abserr,
        valid=valid,
    )


def shell_decomposition(nu: LevyMeasureSpec, r: IndexLike, shells: int) -> ShellDecomposition:
    """Split the unit ball into dyadic shells 2^-(k+1) < rho' <= 2^-k, k < shells."""
    if shells < 1:
        raise InvalidParameterError(f'Shell count must be at least 1, got {shells}')
    r_value = float(r)
    parts: list[Shell] = []
    abserr = 0.0
    for k in range(shells):
        region = Region.shell(2.0 ** -(k + 1), 2.0**-k, r_value)
        moment = second_moment(nu, region)
        abserr += moment.abserr
        parts.append(
            Shell(
                region=region,
                mass=region_mass(nu, region),
                compensator=first_moment(nu, region),
                second_moment=float(moment),
            )
        )
    residual = second_moment(nu, Region.ball(2.0**-shells, r_value))
    LOG.debug(f'Shell decomposition K={shells} at r={r_value}: residual {float(residual)}')
    return ShellDecomposition(
        r=r_value,
        shells=tuple(parts),
        residual=float(residual),
        abserr=abserr + residual.abserr,
    )


def sample_jumps(
    nu: LevyMeasureSpec, region: Region, size: int, rng: np.random.Generator
) -> np.ndarray:
    """Draw `size` i.i.d. points from nu restricted to region and normalized."""
    points, masses = nu.point_masses
    # components: ('atom', row) or ('power', axis, sign, a, b)
    components: list[tuple] = []
    weights: list[float] = []

    if masses.size:
        inside = np.flatnonzero(region.contains(dual_norms(points, region.r)))
        for row in inside:
            components.append(('atom', int(row)))
            weights.append(float(masses[row]))

    for axis in nu.power_axes:
        band = region.axis_band(axis.n, axis.x_max)
        if band is None:
            continue
        mass = axis.band_mass(*band)
        if math.isinf(mass):
            raise InfiniteMassError(f'Cannot sample region {region.kind}: infinite mass')
        for sign in axis.signs:
            components.append(('power', axis, sign, *band))
            weights.append(mass)

    total = float(np.sum(weights)) if weights else 0.0
    if total <= 0.0:
        raise EmptyRegionError(f'Region {region.kind} ({region.lo}, {region.hi}] has zero mass')

    out = np.zeros((size, nu.dim))
    if size == 0:
        return out
    choice = rng.choice(len(components), size=size, p=np.asarray(weights) / total)
    for j, component in enumerate(components):
        idx = np.flatnonzero(choice == j)
        if not idx.size:
            continue
        if component[0] == 'atom':
            out[idx] = points[component[1]]
        else:
            _, axis, sign, a, b = component
            u = 1.0 - rng.random(idx.size)  # (0, 1] keeps draws off the open end
            out[idx, axis.n] = sign * axis.inverse_cdf(u, a, b)
    return out


def sample_jump(nu: LevyMeasureSpec, region: Region, rng: np.random.Generator) -> DualPoint:
    """Draw one point from nu restricted to region and normalized."""
    return DualPoint(sample_jumps(nu, region, 1, rng)[0])
