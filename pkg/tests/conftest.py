"""Common fixtures for nuclear_levy tests."""

from __future__ import annotations

import json
from collections.abc import Callable
from pathlib import Path
from typing import Any

import pytest

from nuclear_levy.char_func import CharTriplet, CovarianceForm
from nuclear_levy.levy_measure import Atom, AtomicAxis, LevyMeasureSpec, PowerLawAxis
from nuclear_levy.models import get_reference_config, triplet_from_json
from nuclear_levy.sequence_space import DualPoint
from nuclear_levy.simulate import SimConfig


@pytest.fixture
def power_axis() -> PowerLawAxis:
    """Return the density x^(-1.5) on (0, 1] along axis 0."""
    return PowerLawAxis(n=0, c=1.0, alpha=0.5, x_max=1.0)


@pytest.fixture
def power_measure(power_axis: PowerLawAxis) -> LevyMeasureSpec:
    """Return a two-dimensional measure carrying only the power-law axis."""
    return LevyMeasureSpec(dim=2, axes=(power_axis,))


@pytest.fixture
def atomic_measure() -> LevyMeasureSpec:
    """Return a finite measure with atoms inside and outside the unit ball."""
    return LevyMeasureSpec(
        dim=3,
        atoms=(
            Atom(DualPoint([0.6, 0.0, 0.0]), 2.0),
            Atom(DualPoint([0.0, 0.0, 3.0]), 1.5),
        ),
        axes=(AtomicAxis(n=1, atoms=((0.3, 1.0), (-0.2, 2.0))),),
    )


@pytest.fixture
def atomic_triplet(atomic_measure: LevyMeasureSpec) -> CharTriplet:
    """Return a triplet with drift, a diagonal Gaussian part and the atomic measure."""
    return CharTriplet(
        mean=DualPoint([0.5, -0.25, 0.0]),
        cov=CovarianceForm.diagonal([1.0, 0.25, 0.5]),
        levy=atomic_measure,
    )


@pytest.fixture
def gaussian_triplet() -> CharTriplet:
    """Return a centered Gaussian triplet in dimension 3."""
    return CharTriplet(
        mean=DualPoint.zeros(3),
        cov=CovarianceForm.diagonal([1.0, 0.5, 0.25]),
        levy=LevyMeasureSpec.empty(3),
    )


@pytest.fixture
def reference_triplet() -> CharTriplet:
    """Return the reference preset triplet (D=8, power law plus tail atom)."""
    return triplet_from_json(get_reference_config('reference')['triplet'])


@pytest.fixture
def make_sim() -> Callable[..., SimConfig]:
    """Return a factory for small simulation configs."""

    def factory(dim: int, **overrides: Any) -> SimConfig:
        params: dict[str, Any] = {
            'horizon': 1.0,
            'grid_dt': 0.25,
            'shells': 6,
            'dim': dim,
            'master_seed': 1234,
            'replicas': 2_000,
            'block_size': 512,
        }
        params.update(overrides)
        return SimConfig(**params)

    return factory


@pytest.fixture
def write_config(tmp_path: Path) -> Callable[..., Path]:
    """Return a helper writing a run config to a JSON file under tmp_path."""

    def writer(data: dict[str, Any], name: str = 'config.json') -> Path:
        path = tmp_path / name
        path.write_text(json.dumps(data), encoding='utf-8')
        return path

    return writer
