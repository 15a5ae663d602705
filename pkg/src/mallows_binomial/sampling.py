"""Exact samplers for the joint model and reproducible stream derivation.

Rankings are drawn by sequential insertion: objects enter the sample in
consensus order, and object ``m`` lands ``v`` places above the bottom of the
current list with probability proportional to ``exp(-theta * v)``.  Each
``v`` adds exactly ``v`` discordant pairs against the consensus, the
displacements are independent, and their normalizers multiply to the model
normalizer, so the draw is exact for every ``theta`` (no burn-in, no
rejection).

Randomness is organized as a tree: :func:`spawn_rng` and :func:`derive_seed`
map a root seed plus an integer path to independent streams.
:func:`sample_dataset` gives judge ``i`` the stream ``(seed, i)``, so a
dataset is reproducible regardless of evaluation order and a larger dataset
extends a smaller one drawn from the same seed.
"""

from __future__ import annotations

import numpy as np

from .model import Dataset, Params, as_ranking, _check_theta

__all__ = [
    "spawn_rng",
    "derive_seed",
    "sample_mallows",
    "sample_ratings",
    "sample_dataset",
]


def _check_path(seed, path) -> tuple[int, tuple[int, ...]]:
    seed = int(seed)
    if seed < 0:
        raise ValueError(f"seed must be non-negative, got {seed}")
    path = tuple(int(k) for k in path)
    if any(k < 0 for k in path):
        raise ValueError(f"stream path entries must be non-negative, got {path}")
    return seed, path


def spawn_rng(seed, *path) -> np.random.Generator:
    """Generator for the stream addressed by ``(seed, *path)``.

    Streams with different paths are statistically independent, and the same
    address always yields the same stream, so callers can hand out
    per-judge, per-replicate, or per-replication generators in any order.
    """
    seed, path = _check_path(seed, path)
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=path))


def derive_seed(seed, *path) -> int:
    """Deterministic child seed for the stream addressed by ``(seed, *path)``.

    Use this to hand a whole subtree of randomness to a component that takes
    a plain integer seed (for example, one bootstrap run per simulated
    dataset).
    """
    seed, path = _check_path(seed, path)
    state = np.random.SeedSequence(seed, spawn_key=path).generate_state(1, np.uint64)
    return int(state[0])


def _insertion_cdfs(theta: float, n_objects: int) -> list[np.ndarray]:
    """Displacement CDFs for insertion steps 1..n-1."""
    cdfs = []
    for m in range(1, n_objects):
        weights = np.exp(-theta * np.arange(m + 1))
        cdf = np.cumsum(weights)
        cdf /= cdf[-1]
        cdf[-1] = 1.0
        cdfs.append(cdf)
    return cdfs


def sample_mallows(consensus, theta, n_samples: int, rng: np.random.Generator) -> np.ndarray:
    """Draw rankings from the Mallows kernel centered at ``consensus``.

    Returns an ``(n_samples, J)`` integer array, one ranking per row, most
    preferred first.
    """
    consensus = as_ranking(consensus)
    theta = _check_theta(theta)
    n_samples = int(n_samples)
    if n_samples < 0:
        raise ValueError(f"n_samples must be non-negative, got {n_samples}")
    n = consensus.size
    # displacement of object m from the bottom of the growing list;
    # drawing step by step keeps stream consumption independent of outcomes
    displacements = np.empty((n_samples, n), dtype=np.intp)
    displacements[:, 0] = 0
    for m, cdf in enumerate(_insertion_cdfs(theta, n), start=1):
        displacements[:, m] = np.searchsorted(cdf, rng.random(n_samples), side="right")
    out = np.empty((n_samples, n), dtype=np.intp)
    for k in range(n_samples):
        row: list[int] = []
        for m in range(n):
            row.insert(m - displacements[k, m], consensus[m])
        out[k] = row
    return out


def sample_ratings(p, max_rating: int, n_samples: int, rng: np.random.Generator) -> np.ndarray:
    """Draw an ``(n_samples, J)`` matrix of independent Binomial ratings."""
    p = np.asarray(p, dtype=float)
    if p.ndim != 1 or p.size == 0:
        raise ValueError("p must be a non-empty 1-D vector")
    if not np.all(np.isfinite(p)) or np.any(p < 0.0) or np.any(p > 1.0):
        raise ValueError(f"every rating probability must lie in [0, 1], got {p.tolist()}")
    max_rating = int(max_rating)
    if max_rating < 1:
        raise ValueError(f"max_rating must be a positive integer, got {max_rating}")
    n_samples = int(n_samples)
    if n_samples < 0:
        raise ValueError(f"n_samples must be non-negative, got {n_samples}")
    return rng.binomial(max_rating, p, size=(n_samples, p.size)).astype(np.int64)


def sample_dataset(
    params: Params,
    n_judges: int,
    max_rating: int,
    seed,
    consensus=None,
) -> Dataset:
    """Simulate a full dataset of paired rankings and ratings.

    Judge ``i`` draws its ranking and then its ratings from the dedicated
    stream ``(seed, i)``, so row ``i`` depends only on the seed and ``i``.
    ``consensus`` defaults to the ranking implied by ``params.p``.
    """
    n_judges = int(n_judges)
    if n_judges < 1:
        raise ValueError(f"need at least one judge, got {n_judges}")
    max_rating = int(max_rating)
    if max_rating < 1:
        raise ValueError(f"max_rating must be a positive integer, got {max_rating}")
    if consensus is None:
        consensus = params.consensus()
    consensus = as_ranking(consensus, params.n_objects)
    n = consensus.size
    center = consensus.tolist()
    cdfs = _insertion_cdfs(params.theta, n)
    seed, _ = _check_path(seed, ())
    # one spawned child per judge; spawn(i) is the stream (seed, i), but
    # hoisting validation and the displacement tables out of the loop makes
    # this inlined draw much faster than per-judge sampler calls
    children = np.random.SeedSequence(seed).spawn(n_judges)
    rankings = np.empty((n_judges, n), dtype=np.intp)
    ratings = np.empty((n_judges, n), dtype=np.int64)
    for i, child in enumerate(children):
        rng = np.random.default_rng(child)
        u = rng.random(n - 1)
        row = [center[0]]
        for m in range(1, n):
            v = int(np.searchsorted(cdfs[m - 1], u[m - 1], side="right"))
            row.insert(m - v, center[m])
        rankings[i] = row
        ratings[i] = rng.binomial(max_rating, params.p)
    return Dataset(ratings=ratings, rankings=rankings, max_rating=max_rating)
