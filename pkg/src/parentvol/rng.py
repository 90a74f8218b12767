"""Counter-based random streams.

Substream ``i`` of a run is a Philox generator whose key is derived from the
master seed and whose counter starts at ``i << 192``; substreams therefore
never overlap and can be created in any order or process.
"""

from __future__ import annotations

import numpy as np

_MASK64 = (1 << 64) - 1


def _key(master_seed: int) -> np.ndarray:
    if not 0 <= int(master_seed) <= _MASK64:
        raise ValueError(f"master_seed must be a 64-bit unsigned integer, got {master_seed!r}")
    return np.random.SeedSequence(int(master_seed)).generate_state(2, dtype=np.uint64)


def stream(master_seed: int, index: int) -> np.random.Generator:
    """Independent generator for substream ``index`` of ``master_seed``."""
    if not 0 <= int(index) <= _MASK64:
        raise ValueError(f"stream index must be a 64-bit unsigned integer, got {index!r}")
    counter = np.array([0, 0, 0, int(index)], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=_key(master_seed), counter=counter))


def chunk_sizes(trials: int, chunk: int) -> list[int]:
    """Split ``trials`` into fixed-size chunks; chunk ``i`` always uses substream ``i``."""
    if trials < 0:
        raise ValueError("trials must be non-negative")
    full, rest = divmod(int(trials), int(chunk))
    return [chunk] * full + ([rest] if rest else [])
