"""Diagnostics export for simulation runs."""

from __future__ import annotations

from dataclasses import asdict
from typing import Any

from .coordinator import ReplicaCoordinator
from .models import RunConfig, sim_to_json, triplet_to_json
from .sequence_space import TestFunction
from .state import SimulationSummary

# keys that depend on the machine rather than the experiment
MACHINE_KEYS = {'workers'}


def _sim_metadata(config: RunConfig) -> dict[str, Any]:
    return {k: v for k, v in sim_to_json(config.sim).items() if k not in MACHINE_KEYS}


def get_simulation_summary(config: RunConfig, summary: SimulationSummary) -> dict[str, Any]:
    """Return the summary.json payload for a simulate run."""
    summary_dict = asdict(summary)
    return {
        'sim': _sim_metadata(config),
        'counts': {
            'large_jumps': summary_dict['large_jumps'],
            'small_jumps': summary_dict['small_jumps'],
            'shell_jumps': summary_dict['shell_jumps'],
            'total_jumps': summary.large_jumps + summary.small_jumps,
        },
        'truncation': {
            'residual': summary_dict['residual'],
            'shell_masses': summary_dict['shell_masses'],
            'tail_mass': summary_dict['tail_mass'],
        },
    }


def get_path_metadata(
    config: RunConfig, coordinator: ReplicaCoordinator, phis: list[TestFunction]
) -> dict[str, Any]:
    """Return the paths.json payload: run metadata, compensators and evaluation grid."""
    decomposition = coordinator.decomposition
    return {
        'triplet': triplet_to_json(config.triplet),
        'sim': _sim_metadata(config),
        'grid': config.sim.grid.tolist(),
        'phis': [phi.to_list() for phi in phis],
        'shells': [
            {
                'k': k,
                'lo': shell.region.lo,
                'hi': shell.region.hi,
                'mass': shell.mass,
                'compensator': shell.compensator.to_list(),
                'second_moment': shell.second_moment,
            }
            for k, shell in enumerate(decomposition.shells)
        ],
        'residual': decomposition.residual,
    }
