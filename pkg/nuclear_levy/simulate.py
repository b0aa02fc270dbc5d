"""Levy-Ito path simulation on a time grid.

A path is L_t = t m + W_t + M_t + J_t: drift, a Brownian part sampled as
grid increments, compensated small jumps drawn shell by shell from the dyadic
decomposition of the unit ball, and large jumps with rho' > 1. Replicas are
simulated in blocks; every block draws from its own substreams so a replica
is reproducible from (master_seed, replica) alone.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Sequence
from dataclasses import dataclass, field

import numpy as np

from .char_func import CharTriplet, CovarianceForm
from .const import DEFAULT_BLOCK_SIZE, DEFAULT_WORKERS, GRID_TOLERANCE, LARGE_TAG, PSD_FLOOR
from .exceptions import DimensionError, DomainError, InvalidParameterError, MatrixError
from .levy_measure import (
    LevyMeasureSpec,
    Region,
    ShellDecomposition,
    region_mass,
    sample_jumps,
    shell_decomposition,
)
from .sequence_space import IndexLike, TestFunction, dual_norms
from .streams import substream

LOG = logging.getLogger(__name__)

COMPONENTS = ('drift', 'wiener', 'small', 'large', 'levy', 'levy_minus_large')
SHELL_PREFIX = 'shell:'


@dataclass(frozen=True)
class SimConfig:
    """Simulation grid, truncation, seed and replica layout."""

    horizon: float
    grid_dt: float
    shells: int
    dim: int
    master_seed: int
    replicas: int
    block_size: int = DEFAULT_BLOCK_SIZE
    workers: int = DEFAULT_WORKERS

    def __post_init__(self) -> None:
        if not (math.isfinite(self.horizon) and self.horizon > 0):
            raise InvalidParameterError(f'Horizon must be positive, got {self.horizon}')
        if not 0 < self.grid_dt <= self.horizon:
            raise InvalidParameterError(f'Grid step must lie in (0, T], got {self.grid_dt}')
        if self.shells < 1:
            raise InvalidParameterError(f'Shell count must be at least 1, got {self.shells}')
        if self.dim < 1:
            raise DimensionError(f'Truncation must be at least 1, got {self.dim}')
        if self.replicas < 1:
            raise InvalidParameterError(f'Replica count must be at least 1, got {self.replicas}')
        if self.block_size < 1 or self.workers < 1:
            raise InvalidParameterError('Block size and worker count must be positive')
        if not 0 <= self.master_seed < 2**64:
            raise InvalidParameterError(f'Master seed must fit in 64 bits, got {self.master_seed}')

    @property
    def n_cells(self) -> int:
        return max(1, math.ceil(self.horizon / self.grid_dt - 1e-9))

    @property
    def grid(self) -> np.ndarray:
        """Grid nodes 0 = t_0 < ... < t_n = T; the last cell may be short."""
        nodes = np.minimum(np.arange(self.n_cells + 1) * self.grid_dt, self.horizon)
        nodes[-1] = self.horizon
        return nodes

    def is_node(self, t: float) -> bool:
        """True when t coincides with a grid node."""
        tolerance = GRID_TOLERANCE * self.horizon
        return bool(np.any(np.abs(self.grid - t) <= tolerance))

    @property
    def n_blocks(self) -> int:
        return math.ceil(self.replicas / self.block_size)

    def block_range(self, block: int) -> range:
        start = block * self.block_size
        return range(start, min(start + self.block_size, self.replicas))


@dataclass
class JumpRecords:
    """Jump times, component tags, marks and owning replica, sorted by (replica, time)."""

    time: np.ndarray
    tag: np.ndarray
    marks: np.ndarray
    replica: np.ndarray

    @classmethod
    def empty(cls, dim: int) -> JumpRecords:
        return cls(
            time=np.zeros(0),
            tag=np.zeros(0, dtype=np.int64),
            marks=np.zeros((0, dim)),
            replica=np.zeros(0, dtype=np.int64),
        )

    @classmethod
    def concat(cls, parts: Sequence[JumpRecords], dim: int) -> JumpRecords:
        if not parts:
            return cls.empty(dim)
        merged = cls(
            time=np.concatenate([p.time for p in parts]),
            tag=np.concatenate([p.tag for p in parts]),
            marks=np.vstack([p.marks for p in parts]),
            replica=np.concatenate([p.replica for p in parts]),
        )
        return merged.sorted()

    def sorted(self) -> JumpRecords:
        order = np.lexsort((self.tag, self.time, self.replica))
        return self.subset(order)

    def subset(self, index: np.ndarray) -> JumpRecords:
        return JumpRecords(
            time=self.time[index],
            tag=self.tag[index],
            marks=self.marks[index],
            replica=self.replica[index],
        )

    def __len__(self) -> int:
        return int(self.time.size)


@dataclass
class PathSkeleton:
    """Batch of replica paths: grid increments, jump records and shell compensators."""

    grid: np.ndarray
    wiener_increments: np.ndarray  # (B, n_cells, D)
    jumps: JumpRecords
    drift: np.ndarray  # (D,)
    compensators: np.ndarray  # (K, D)
    residual: float
    r: float
    first_replica: int = 0
    shell_masses: np.ndarray = field(default_factory=lambda: np.zeros(0))

    @property
    def horizon(self) -> float:
        return float(self.grid[-1])

    @property
    def size(self) -> int:
        return int(self.wiener_increments.shape[0])

    @property
    def dim(self) -> int:
        return int(self.drift.size)

    def _check_time(self, t: float) -> None:
        if not 0.0 <= t <= self.horizon:
            raise DomainError(f'Evaluation time {t} outside [0, {self.horizon}]')

    def _wiener(self, t: float, coords: np.ndarray) -> np.ndarray:
        projected = self.wiener_increments @ coords  # (B, n)
        cumulative = np.zeros((self.size, projected.shape[1] + 1))
        np.cumsum(projected, axis=1, out=cumulative[:, 1:])
        n_cells = projected.shape[1]
        idx = min(int(np.searchsorted(self.grid, t, side='right')) - 1, n_cells - 1)
        lo, hi = self.grid[idx], self.grid[idx + 1]
        frac = (t - lo) / (hi - lo)
        return cumulative[:, idx] + frac * (cumulative[:, idx + 1] - cumulative[:, idx])

    def _jump_sum(
        self, t: float, coords: np.ndarray, tags: np.ndarray, left_limit: bool
    ) -> np.ndarray:
        jumps = self.jumps
        before = jumps.time < t if left_limit else jumps.time <= t
        mask = before & np.isin(jumps.tag, tags)
        weights = np.where(mask, jumps.marks @ coords, 0.0)
        return np.bincount(jumps.replica - self.first_replica, weights=weights, minlength=self.size)

    def _shells(self, component: str) -> np.ndarray:
        if component == 'small':
            return np.arange(self.compensators.shape[0])
        shell = int(component.removeprefix(SHELL_PREFIX))
        if not 0 <= shell < self.compensators.shape[0]:
            raise InvalidParameterError(f'No shell {shell} among {len(self.compensators)} shells')
        return np.array([shell])

    def values(
        self,
        t: float,
        phi: TestFunction,
        component: str = 'levy',
        *,
        left_limit: bool = False,
    ) -> np.ndarray:
        """Evaluate component[phi] at time t for every replica in the batch."""
        self._check_time(t)
        if phi.dim != self.dim:
            raise DimensionError(f'Test function of dim {phi.dim} on a dim {self.dim} path')
        coords = phi.coords

        if component == 'drift':
            return np.full(self.size, t * float(self.drift @ coords))
        if component == 'wiener':
            return self._wiener(t, coords)
        if component == 'large':
            return self._jump_sum(t, coords, np.array([LARGE_TAG]), left_limit)
        if component == 'small' or component.startswith(SHELL_PREFIX):
            shells = self._shells(component)
            drift = t * float(np.sum(self.compensators[shells] @ coords))
            return self._jump_sum(t, coords, shells, left_limit) - drift
        if component == 'levy_minus_large':
            return (
                self.values(t, phi, 'drift')
                + self.values(t, phi, 'wiener')
                + self.values(t, phi, 'small', left_limit=left_limit)
            )
        if component == 'levy':
            return self.values(t, phi, 'levy_minus_large', left_limit=left_limit) + self.values(
                t, phi, 'large', left_limit=left_limit
            )
        raise InvalidParameterError(f"Unknown component '{component}'. Supported: {COMPONENTS}")

    def counts(self, region: Region, t: float) -> np.ndarray:
        """Return N(t, A) for every replica; A must be bounded below."""
        self._check_time(t)
        if not region.bounded_below:
            raise InvalidParameterError(f'Counts need a region bounded below, got {region.kind}')
        floor = 2.0 ** -self.compensators.shape[0]
        if region.r == self.r and region.lo < floor:
            raise DomainError(f'Region starts at {region.lo} below the jump floor {floor}')
        jumps = self.jumps
        mask = region.contains(dual_norms(jumps.marks, region.r)) & (jumps.time <= t)
        return np.bincount(
            jumps.replica[mask] - self.first_replica, minlength=self.size
        ).astype(np.int64)

    def path(self, index: int) -> PathSkeleton:
        """Single replica view (index relative to this batch)."""
        if not 0 <= index < self.size:
            raise InvalidParameterError(f'Replica {index} outside batch of {self.size}')
        replica = self.first_replica + index
        return PathSkeleton(
            grid=self.grid,
            wiener_increments=self.wiener_increments[index : index + 1],
            jumps=self.jumps.subset(np.flatnonzero(self.jumps.replica == replica)),
            drift=self.drift,
            compensators=self.compensators,
            residual=self.residual,
            r=self.r,
            first_replica=replica,
            shell_masses=self.shell_masses,
        )


def _karhunen_loeve_factor(cov: CovarianceForm) -> np.ndarray:
    """Return F with F F^T = Q from the eigendecomposition, clipping tiny negative modes."""
    values, vectors = np.linalg.eigh(cov.matrix)
    scale = max(1.0, float(np.max(np.abs(cov.matrix))))
    if values.size and values[0] < PSD_FLOOR * scale:
        raise MatrixError(f'Covariance factorization failed: eigenvalue {values[0]}')
    return vectors * np.sqrt(np.clip(values, 0.0, None))


def sample_wiener(
    cov: CovarianceForm, cfg: SimConfig, rng: np.random.Generator, size: int = 1
) -> np.ndarray:
    """Draw Brownian increments of shape (size, n_cells, D) with covariance dt * Q."""
    if cov.dim != cfg.dim:
        raise DimensionError(f'Covariance of dim {cov.dim} with a dim {cfg.dim} config')
    if cov.is_zero:
        return np.zeros((size, cfg.n_cells, cfg.dim))
    factor = _karhunen_loeve_factor(cov)
    steps = np.sqrt(np.diff(cfg.grid))
    noise = rng.standard_normal((size, cfg.n_cells, cfg.dim))
    return (noise @ factor.T) * steps[None, :, None]


def _compound_poisson(
    nu: LevyMeasureSpec,
    region: Region,
    rate: float,
    tag: int,
    cfg: SimConfig,
    rng: np.random.Generator,
    size: int,
) -> JumpRecords:
    """Poisson(rate T) jumps per replica with uniform times and marks from nu|A."""
    counts = rng.poisson(rate * cfg.horizon, size)
    total = int(counts.sum())
    if total == 0:
        return JumpRecords.empty(cfg.dim)
    times = cfg.horizon * (1.0 - rng.random(total))  # (0, T]
    marks = sample_jumps(nu, region, total, rng)
    return JumpRecords(
        time=times,
        tag=np.full(total, tag, dtype=np.int64),
        marks=marks,
        replica=np.repeat(np.arange(size, dtype=np.int64), counts),
    )


def sample_large_jumps(
    nu: LevyMeasureSpec, r: IndexLike, cfg: SimConfig, rng: np.random.Generator, size: int = 1
) -> JumpRecords:
    """Jumps with rho' > 1 for `size` replicas, replica indices local to the batch."""
    tail = Region.complement(1.0, r)
    rate = region_mass(nu, tail)
    if rate == 0.0:
        return JumpRecords.empty(cfg.dim)
    return _compound_poisson(nu, tail, rate, LARGE_TAG, cfg, rng, size)


def sample_small_jumps(
    nu: LevyMeasureSpec,
    r: IndexLike,
    cfg: SimConfig,
    rngs: Sequence[np.random.Generator],
    size: int = 1,
    decomposition: ShellDecomposition | None = None,
) -> tuple[JumpRecords, ShellDecomposition]:
    """Shell-by-shell compound Poisson jumps inside the unit ball.

    rngs holds one generator per shell. The compensated component at time t is
    the jump sum up to t minus t times the compensators of the decomposition.
    """
    if decomposition is None:
        decomposition = shell_decomposition(nu, r, cfg.shells)
    if len(rngs) < len(decomposition.shells):
        needed = len(decomposition.shells)
        raise InvalidParameterError(f'Need {needed} shell streams, got {len(rngs)}')
    parts = [
        _compound_poisson(nu, shell.region, shell.mass, k, cfg, rngs[k], size)
        for k, shell in enumerate(decomposition.shells)
        if shell.mass > 0.0
    ]
    return JumpRecords.concat(parts, cfg.dim), decomposition


def simulate_block(
    triplet: CharTriplet,
    cfg: SimConfig,
    block: int,
    decomposition: ShellDecomposition | None = None,
) -> PathSkeleton:
    """Simulate every replica of one block from the block's own substreams."""
    if triplet.dim != cfg.dim:
        raise DimensionError(f'Triplet of dim {triplet.dim} with a dim {cfg.dim} config')
    replicas = cfg.block_range(block)
    size = len(replicas)
    if size == 0:
        raise InvalidParameterError(f'Block {block} is empty for {cfg.replicas} replicas')
    seed = cfg.master_seed

    wiener = sample_wiener(triplet.cov, cfg, substream(seed, block, 'wiener'), size)
    large = sample_large_jumps(triplet.levy, triplet.r, cfg, substream(seed, block, 'large'), size)
    shell_rngs = [substream(seed, block, 'small', k) for k in range(cfg.shells)]
    small, decomposition = sample_small_jumps(
        triplet.levy, triplet.r, cfg, shell_rngs, size, decomposition
    )

    jumps = JumpRecords.concat([large, small], cfg.dim)
    jumps.replica += replicas.start
    LOG.debug(f'Block {block}: {size} replicas, {len(large)} large and {len(small)} small jumps')
    return PathSkeleton(
        grid=cfg.grid,
        wiener_increments=wiener,
        jumps=jumps,
        drift=np.array(triplet.mean.coords),
        compensators=decomposition.compensators,
        residual=decomposition.residual,
        r=triplet.r,
        first_replica=replicas.start,
        shell_masses=decomposition.masses,
    )


def assemble_levy(triplet: CharTriplet, cfg: SimConfig, replica: int = 0) -> PathSkeleton:
    """Return the path of one replica, simulated with the rest of its block."""
    if not 0 <= replica < cfg.replicas:
        raise InvalidParameterError(f'Replica {replica} outside 0..{cfg.replicas - 1}')
    block = replica // cfg.block_size
    batch = simulate_block(triplet, cfg, block)
    return batch.path(replica - batch.first_replica)


def evaluate_component(
    path: PathSkeleton,
    component: str,
    t: float,
    phi: TestFunction,
    *,
    replica: int = 0,
    left_limit: bool = False,
) -> float:
    """Evaluate one decomposition component of one replica at time t."""
    return float(path.values(t, phi, component, left_limit=left_limit)[replica])


def evaluate_path(
    path: PathSkeleton, t: float, phi: TestFunction, *, replica: int = 0, left_limit: bool = False
) -> float:
    """Right-continuous evaluation of L_t[phi] (left limit L_{t-}[phi] on request)."""
    return evaluate_component(path, 'levy', t, phi, replica=replica, left_limit=left_limit)


def count_jumps(path: PathSkeleton, region: Region, t: float, *, replica: int = 0) -> int:
    """Return N(t, A) = #{s <= t : Delta L_s in A} for one replica."""
    return int(path.counts(region, t)[replica])
