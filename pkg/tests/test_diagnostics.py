"""Tests for simulation diagnostics and output helpers."""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np
import pytest

from nuclear_levy.coordinator import ReplicaCoordinator
from nuclear_levy.diagnostics import MACHINE_KEYS, get_path_metadata, get_simulation_summary
from nuclear_levy.models import RunConfig, get_reference_config, run_config_from_json
from nuclear_levy.utils import dumps_json, format_number, get_output_dir


@pytest.fixture
def atomic_config() -> RunConfig:
    """Return the atomic preset with few replicas."""
    data = get_reference_config('atomic')
    data['sim']['replicas'] = 40
    return run_config_from_json(data)


def test_simulation_summary(atomic_config: RunConfig) -> None:
    """Test the summary payload."""
    coordinator = ReplicaCoordinator(atomic_config.triplet, atomic_config.sim)
    result = get_simulation_summary(atomic_config, coordinator.summary())

    assert set(result) == {'sim', 'counts', 'truncation'}
    assert not MACHINE_KEYS & set(result['sim'])
    counts = result['counts']
    assert counts['total_jumps'] == counts['large_jumps'] + counts['small_jumps']
    assert result['truncation']['tail_mass'] == pytest.approx(1.5)


def test_path_metadata(atomic_config: RunConfig) -> None:
    """Test the path metadata lists shells and the evaluation grid."""
    coordinator = ReplicaCoordinator(atomic_config.triplet, atomic_config.sim)
    result = get_path_metadata(atomic_config, coordinator, atomic_config.cf.phis)

    assert result['grid'] == [0.0, 0.25, 0.5, 0.75, 1.0]
    assert len(result['shells']) == atomic_config.sim.shells
    assert result['shells'][0]['mass'] == pytest.approx(2.0)
    assert result['shells'][0]['compensator'] == pytest.approx([1.2, 0.0, 0.0, 0.0])
    assert 'workers' not in result['sim']
    json.loads(dumps_json(result))


def test_format_number() -> None:
    """Test numbers are written with 17 significant digits."""
    assert format_number(0.1) == '0.10000000000000001'
    assert format_number(np.float64(1.0)) == '1'
    assert format_number(np.int64(3)) == '3'
    assert format_number(True) == '1'
    assert format_number('x') == 'x'


def test_dumps_json_numpy() -> None:
    """Test numpy values serialize as builtins with sorted keys."""
    text = dumps_json({'b': np.arange(2), 'a': np.float64(0.5)})
    assert text == '{\n  "a": 0.5,\n  "b": [\n    0,\n    1\n  ]\n}\n'


def test_get_output_dir(monkeypatch: pytest.MonkeyPatch) -> None:
    """Test output dir precedence: flag, config, environment, default."""
    monkeypatch.setenv('NUCLEAR_LEVY_OUTPUT_DIR', 'from-env')
    assert get_output_dir('flag', 'config') == Path('flag')
    assert get_output_dir(None, 'config') == Path('config')
    assert get_output_dir(None, None) == Path('from-env')
    monkeypatch.delenv('NUCLEAR_LEVY_OUTPUT_DIR')
    assert get_output_dir() == Path('output')
