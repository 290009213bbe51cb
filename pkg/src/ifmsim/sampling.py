"""Seeded multinomial sampling from exact outcome distributions.

Draws use numpy's PCG64 generator. A single draw seeds it with the given
seed; the ``i``-th task of a multi-seed run uses ``SeedSequence([seed, i])``
so every task has its own stream regardless of scheduling.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import BadParamError

GENERATOR = "numpy.random.PCG64"
MAX_SEED = 2**64 - 1


def _check(shots, seed):
    if isinstance(shots, bool) or int(shots) != shots or shots < 1:
        raise BadParamError(f"shots={shots!r} must be a positive integer")
    if isinstance(seed, bool) or int(seed) != seed or not 0 <= seed <= MAX_SEED:
        raise BadParamError(f"seed={seed!r} must be an unsigned 64-bit integer")


def _draw(dist, shots, seed_seq):
    keys = list(dist)
    p = np.array([dist[k] for k in keys], dtype=float)
    if not keys or p.sum() <= 0:
        raise BadParamError("cannot sample from an empty distribution")
    p = np.clip(p, 0.0, None)
    rng = np.random.Generator(np.random.PCG64(seed_seq))
    counts = rng.multinomial(int(shots), p / p.sum())
    return {str(k): int(c) for k, c in zip(keys, counts)}


def sample(dist, shots, seed=0):
    """Counts per event for ``shots`` draws; every event of ``dist`` appears."""
    _check(shots, seed)
    return _draw(dist, shots, np.random.SeedSequence(int(seed)))


def task_seed(seed, index):
    return np.random.SeedSequence([int(seed), int(index)])


def sample_many(dist, shots, seed, n_tasks, workers=1):
    """Independent draws for ``n_tasks`` tasks, returned in task order."""
    _check(shots, seed)
    if n_tasks < 1:
        raise BadParamError("n_tasks must be at least 1")
    jobs = [task_seed(seed, i) for i in range(n_tasks)]
    if workers <= 1:
        return [_draw(dist, shots, s) for s in jobs]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda s: _draw(dist, shots, s), jobs))


@dataclass(frozen=True)
class Empirical:
    shots: int
    seed: int
    counts: dict
    frequencies: dict
    std_errors: dict  # sqrt(p (1 - p) / shots) from the exact p


def standard_error(p, shots):
    return math.sqrt(max(p * (1.0 - p), 0.0) / shots)


def empirical(dist, shots, seed=0):
    counts = sample(dist, shots, seed)
    freqs = {k: c / shots for k, c in counts.items()}
    ses = {str(k): standard_error(p, shots) for k, p in dist.items()}
    return Empirical(int(shots), int(seed), counts, freqs, ses)
