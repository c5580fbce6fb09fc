"""Deterministic random streams.

A master seed ``s`` is expanded into one independent stream per trial by
``SeedSequence([s, trial])``. The stream for a trial depends only on the pair,
so running trials in any order or on any number of threads gives the same
draws.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor

import numpy as np


def stream(seed: int, index: int = 0) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([int(seed), int(index)]))


def map_trials(fn, seed: int, trials: int, threads: int = 1) -> list:
    """``[fn(trial, stream(seed, trial)) for trial in range(trials)]``, optionally threaded."""
    jobs = range(trials)
    if threads <= 1:
        return [fn(t, stream(seed, t)) for t in jobs]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(lambda t: fn(t, stream(seed, t)), jobs))
