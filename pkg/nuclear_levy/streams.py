"""Counter-based random substreams.

A run with master seed S draws every random number from a Philox generator
keyed by (S, block, component, shell). Blocks are fixed runs of consecutive
replicas, so a replica's draws never depend on how blocks are spread over
workers.
"""

from __future__ import annotations

from typing import Final

import numpy as np

from .exceptions import InvalidParameterError

COMPONENT_KEYS: Final[dict[str, int]] = {
    'wiener': 0,
    'large': 1,
    'small': 2,
}


def _entropy(master_seed: int) -> int:
    if master_seed < 0:
        raise InvalidParameterError(f'Master seed must be non-negative, got {master_seed}')
    return int(master_seed)


def substream(master_seed: int, block: int, component: str, shell: int = 0) -> np.random.Generator:
    """Return the generator owned by one (block, component, shell) triple."""
    if component not in COMPONENT_KEYS:
        raise InvalidParameterError(
            f"Unknown component '{component}'. Supported: {list(COMPONENT_KEYS)}"
        )
    seq = np.random.SeedSequence(
        entropy=_entropy(master_seed),
        spawn_key=(int(block), COMPONENT_KEYS[component], int(shell)),
    )
    return np.random.Generator(np.random.Philox(seq))


def derive_seed(master_seed: int, *labels: int) -> int:
    """Derive an independent 63-bit master seed from a seed and integer labels."""
    seq = np.random.SeedSequence(entropy=_entropy(master_seed), spawn_key=tuple(labels))
    return int(seq.generate_state(1, np.uint64)[0] >> np.uint64(1))
