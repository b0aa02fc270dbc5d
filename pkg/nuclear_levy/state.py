"""Dataclasses for reports and run summaries."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

STATUS_PASS = 'pass'
STATUS_FAIL = 'fail'
STATUS_INCONCLUSIVE = 'inconclusive'


@dataclass
class ValidationReport:
    """Levy measure conditions evaluated at one seminorm index."""

    r: float
    origin_mass: float = 0.0  # structural, always zero after construction
    small_ball_moment: float = 0.0
    tail_mass: float = 0.0
    abserr: float = 0.0  # quadrature error of the small-ball moment
    valid: bool = True


@dataclass
class TestReport:
    """Outcome of one statistical or deterministic check.

    `passed` holds exactly when `statistic <= threshold`. `status` adds the
    inconclusive outcome used when a premise could not be established.
    """

    __test__ = False  # keep pytest from collecting this class

    name: str
    statistic: float
    threshold: float
    passed: bool
    sample_size: int = 0
    seed: int | None = None
    notes: list[str] = field(default_factory=list)
    status: str = STATUS_PASS
    details: dict[str, Any] = field(default_factory=dict)

    @classmethod
    def from_comparison(
        cls,
        name: str,
        statistic: float,
        threshold: float,
        **kwargs: Any,
    ) -> TestReport:
        """Build a report whose pass flag and status follow statistic <= threshold."""
        passed = bool(statistic <= threshold)
        return cls(
            name=name,
            statistic=float(statistic),
            threshold=float(threshold),
            passed=passed,
            status=STATUS_PASS if passed else STATUS_FAIL,
            **kwargs,
        )

    @classmethod
    def inconclusive(
        cls, name: str, statistic: float, threshold: float, **kwargs: Any
    ) -> TestReport:
        return cls(
            name=name,
            statistic=float(statistic),
            threshold=float(threshold),
            passed=bool(statistic <= threshold),
            status=STATUS_INCONCLUSIVE,
            **kwargs,
        )


@dataclass
class SimulationSummary:
    """Counts and truncation data for one simulate run."""

    replicas: int
    horizon: float
    grid_dt: float
    shells: int
    dim: int
    master_seed: int
    residual: float  # res(K)
    large_jumps: int = 0
    small_jumps: int = 0
    shell_jumps: list[int] = field(default_factory=list)
    shell_masses: list[float] = field(default_factory=list)
    tail_mass: float = 0.0
