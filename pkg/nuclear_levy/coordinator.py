"""Replica coordinator for block-parallel simulation."""

from __future__ import annotations

import logging
from collections.abc import Callable, Iterator, Sequence
from concurrent.futures import ThreadPoolExecutor
from typing import TypeVar

import numpy as np

from .char_func import CharTriplet
from .levy_measure import Region, region_mass, shell_decomposition
from .sequence_space import TestFunction
from .simulate import PathSkeleton, SimConfig, simulate_block
from .state import SimulationSummary

LOG = logging.getLogger(__name__)

R = TypeVar('R')


class ReplicaCoordinator:
    """Coordinator to simulate replica blocks and merge results in replica order."""

    def __init__(self, triplet: CharTriplet, cfg: SimConfig) -> None:
        """Initialize the coordinator."""
        self.triplet = triplet
        self.cfg = cfg
        self.decomposition = shell_decomposition(triplet.levy, triplet.r, cfg.shells)

    def _simulate(self, block: int) -> PathSkeleton:
        return simulate_block(self.triplet, self.cfg, block, self.decomposition)

    def imap(self, reducer: Callable[[PathSkeleton], R]) -> Iterator[R]:
        """Apply reducer to every block, yielding results in block order."""
        blocks = range(self.cfg.n_blocks)

        def work(block: int) -> R:
            return reducer(self._simulate(block))

        if self.cfg.workers == 1 or len(blocks) == 1:
            for block in blocks:
                yield work(block)
        else:
            with ThreadPoolExecutor(max_workers=self.cfg.workers) as pool:
                yield from pool.map(work, blocks)
        LOG.debug(f'Simulated {self.cfg.replicas} replicas in {len(blocks)} blocks')

    def run(self, reducer: Callable[[PathSkeleton], R]) -> list[R]:
        """Apply reducer to every block; results come back in block order."""
        return list(self.imap(reducer))

    def batches(self) -> Iterator[PathSkeleton]:
        """Yield simulated blocks in block order."""
        return self.imap(lambda batch: batch)

    def sample_components(
        self,
        times: Sequence[float],
        phis: Sequence[TestFunction],
        components: Sequence[str],
    ) -> dict[str, np.ndarray]:
        """Return {component: (len(times), len(phis), N) array} from one simulation pass."""

        def reduce(batch: PathSkeleton) -> dict[str, np.ndarray]:
            return {
                component: np.array(
                    [[batch.values(t, phi, component) for phi in phis] for t in times]
                ).reshape(len(times), len(phis), batch.size)
                for component in components
            }

        parts = self.run(reduce)
        return {
            component: np.concatenate([part[component] for part in parts], axis=-1)
            for component in components
        }

    def sample(
        self,
        times: Sequence[float],
        phis: Sequence[TestFunction],
        component: str = 'levy',
    ) -> np.ndarray:
        """Return replica samples of component[phi] at each time, shape (T, P, N)."""
        return self.sample_components(times, phis, [component])[component]

    def counts(self, regions: Sequence[Region], t: float) -> np.ndarray:
        """Return jump counts N(t, A) per region, shape (len(regions), N)."""

        def reduce(batch: PathSkeleton) -> np.ndarray:
            return np.array([batch.counts(region, t) for region in regions]).reshape(
                len(regions), batch.size
            )

        return np.concatenate(self.run(reduce), axis=-1)

    def summarize(self, totals: np.ndarray) -> SimulationSummary:
        """Build the run summary from per-shell jump totals (large jumps last)."""
        shells = self.cfg.shells
        tail = region_mass(self.triplet.levy, Region.complement(1.0, self.triplet.r))
        return SimulationSummary(
            replicas=self.cfg.replicas,
            horizon=self.cfg.horizon,
            grid_dt=self.cfg.grid_dt,
            shells=shells,
            dim=self.cfg.dim,
            master_seed=self.cfg.master_seed,
            residual=self.decomposition.residual,
            large_jumps=int(totals[shells]),
            small_jumps=int(np.sum(totals[:shells])),
            shell_jumps=[int(x) for x in totals[:shells]],
            shell_masses=[float(x) for x in self.decomposition.masses],
            tail_mass=tail,
        )

    def summary(self) -> SimulationSummary:
        """Count jumps per shell over the whole run."""
        shells = self.cfg.shells
        totals = np.sum(self.run(lambda batch: tag_counts(batch, shells)), axis=0)
        return self.summarize(totals)


def tag_counts(batch: PathSkeleton, shells: int) -> np.ndarray:
    """Jump counts per shell tag with the large jumps in the last slot."""
    tags = np.where(batch.jumps.tag < 0, shells, batch.jumps.tag)
    return np.bincount(tags, minlength=shells + 1)
