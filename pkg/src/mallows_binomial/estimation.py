"""Joint maximum-likelihood estimation of qualities, concentration, consensus.

The log-likelihood splits, for a fixed consensus ranking, into a rating term
(independent Binomials under an order constraint along the consensus) and a
ranking term (concentration against the observed mean Kendall distance).
Both profile maximizers are available in closed form:

* qualities: pool-adjacent-violators on the per-object mean ratings, then a
  box clamp, which solves the order-constrained Binomial problem because all
  objects share the same judge count and rating scale;
* concentration: the expected Kendall distance is strictly decreasing in
  ``theta``, so the MLE inverts it at the observed mean distance (clamping to
  the box when the observed mean lies outside the attainable range).

The consensus itself is discrete.  :func:`fit_exhaustive` profiles every
permutation; :func:`fit_best_first` explores prefixes of the consensus with
an upper bound on the best completion and provably returns the same optimum,
usually after profiling a small fraction of the permutations.
"""

from __future__ import annotations

import heapq
import itertools
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq, isotonic_regression

from .model import (
    DEFAULT_BOUNDS,
    Dataset,
    ParamBounds,
    SufficientStats,
    _loglik_from_stats,
    as_ranking,
    expected_distance,
    log_psi,
)

__all__ = [
    "constrained_p_mle",
    "theta_mle",
    "ProfileFit",
    "profile_loglik",
    "FitResult",
    "fit_exhaustive",
    "fit_best_first",
    "fit",
]

# safety margin for branch-and-bound pruning: bounds are computed with
# different floating-point operations than full profiles, so pruning must
# survive rounding noise without ever discarding the true optimum
_PRUNE_SLACK = 1e-7


def _as_stats(data) -> SufficientStats:
    return data if isinstance(data, SufficientStats) else SufficientStats.from_dataset(data)


def constrained_p_mle(xbar, max_rating: int, order, bounds: ParamBounds = DEFAULT_BOUNDS):
    """Order-constrained Binomial MLE of the quality vector.

    Maximizes the rating log-likelihood subject to ``p`` being nondecreasing
    along ``order`` and inside the bounds box.  Pool-adjacent-violators on
    the mean ratings gives the order-constrained optimum (equal weights:
    every object is rated by every judge on the same scale); clipping to the
    box afterwards preserves monotonicity and optimality because the
    objective is separable and concave with coordinate maxima at the means.

    Returns a vector indexed by object, not by rank.
    """
    xbar = np.asarray(xbar, dtype=float)
    order = as_ranking(order, xbar.size)
    means = xbar / max_rating
    fitted = isotonic_regression(means[order], increasing=True).x
    p = np.empty(xbar.size)
    p[order] = np.clip(fitted, bounds.p_min, bounds.p_max)
    return p


def theta_mle(
    dbar: float, n_objects: int, bounds: ParamBounds = DEFAULT_BOUNDS
) -> tuple[float, bool]:
    """Concentration MLE given the observed mean Kendall distance.

    Inverts the strictly decreasing expected-distance function at ``dbar``.
    When ``dbar`` falls outside the range attainable inside the box (for
    example, perfectly unanimous rankings give ``dbar == 0``), the estimate
    clamps to the nearer box edge and the second return value is True.
    """
    dbar = float(dbar)
    if dbar < 0.0:
        raise ValueError(f"mean distance must be non-negative, got {dbar}")
    if dbar <= expected_distance(bounds.theta_max, n_objects):
        return bounds.theta_max, True
    if dbar >= expected_distance(bounds.theta_min, n_objects):
        return bounds.theta_min, True
    theta = brentq(
        lambda t: expected_distance(t, n_objects) - dbar,
        bounds.theta_min,
        bounds.theta_max,
        xtol=1e-12,
        rtol=8.9e-16,
    )
    return float(theta), False


@dataclass(frozen=True)
class ProfileFit:
    """Profile maximum for one fixed candidate consensus."""

    consensus: np.ndarray
    p: np.ndarray
    theta: float
    theta_clamped: bool
    loglik: float


def profile_loglik(
    data, consensus, bounds: ParamBounds = DEFAULT_BOUNDS
) -> ProfileFit:
    """Maximize qualities and concentration for one candidate consensus.

    ``data`` may be a :class:`Dataset` or precomputed
    :class:`SufficientStats`.
    """
    stats = _as_stats(data)
    consensus = as_ranking(consensus, stats.n_objects)
    p = constrained_p_mle(stats.xbar, stats.max_rating, consensus, bounds)
    theta, clamped = theta_mle(stats.mean_distance(consensus), stats.n_objects, bounds)
    loglik = _loglik_from_stats(stats, p, theta, consensus)
    return ProfileFit(
        consensus=consensus, p=p, theta=theta, theta_clamped=clamped, loglik=loglik
    )


@dataclass(frozen=True)
class FitResult:
    """Joint MLE over all candidate consensus rankings.

    ``candidates_profiled`` counts full consensus rankings whose profile
    maximum was evaluated; ``nodes_expanded`` counts the prefixes the
    best-first search took off its queue (zero for the exhaustive method).
    """

    consensus: np.ndarray
    p: np.ndarray
    theta: float
    theta_clamped: bool
    loglik: float
    method: str
    candidates_profiled: int
    nodes_expanded: int

    def params_consistent(self) -> bool:
        """True when the reported consensus orders the fitted qualities."""
        return bool(np.all(np.diff(self.p[self.consensus]) >= 0.0))


def _result(best: ProfileFit, method: str, candidates: int, nodes: int) -> FitResult:
    return FitResult(
        consensus=best.consensus,
        p=best.p,
        theta=best.theta,
        theta_clamped=best.theta_clamped,
        loglik=best.loglik,
        method=method,
        candidates_profiled=candidates,
        nodes_expanded=nodes,
    )


def fit_exhaustive(
    data, bounds: ParamBounds = DEFAULT_BOUNDS, exhaustive_cap: int = 8
) -> FitResult:
    """Joint MLE by profiling every consensus permutation.

    Ties in the profiled log-likelihood go to the lexicographically smallest
    consensus.  Refuses to run past ``exhaustive_cap`` objects (the candidate
    count grows factorially); use :func:`fit_best_first` there instead.
    """
    stats = _as_stats(data)
    if stats.n_objects > exhaustive_cap:
        raise ValueError(
            f"exhaustive search over {stats.n_objects} objects means "
            f"{stats.n_objects}! candidates; raise exhaustive_cap or use "
            "fit_best_first"
        )
    best = None
    count = 0
    for perm in itertools.permutations(range(stats.n_objects)):
        candidate = profile_loglik(stats, perm, bounds)
        count += 1
        if best is None or candidate.loglik > best.loglik:
            best = candidate
    return _result(best, "exhaustive", count, 0)


def _free_rating_bounds(stats: SufficientStats, bounds: ParamBounds) -> np.ndarray:
    """Per-object rating-term maxima with no order constraint at all."""
    means = np.clip(stats.xbar / stats.max_rating, bounds.p_min, bounds.p_max)
    return stats.xbar * np.log(means) + (stats.max_rating - stats.xbar) * np.log1p(-means)


def _prefix_bound(
    stats: SufficientStats,
    prefix: tuple[int, ...],
    free: np.ndarray,
    free_rating: np.ndarray,
    bounds: ParamBounds,
) -> float:
    """Upper bound on the profile log-likelihood over completions of ``prefix``.

    Relaxations: free objects drop their order constraints entirely
    (keeping only the box), and the mean distance is lowered to its minimum
    over completions, with the concentration then chosen optimally for that
    minimum.  Every relaxation only raises the value, so no completion can
    beat the bound.
    """
    prefix_arr = np.asarray(prefix, dtype=np.intp)
    # rating term: exact order-constrained maximum on the prefix chain,
    # unconstrained per-object maxima for the rest
    rating = float(np.sum(free_rating[free]))
    if prefix_arr.size:
        chain = isotonic_regression(
            stats.xbar[prefix_arr] / stats.max_rating, increasing=True
        ).x
        chain = np.clip(chain, bounds.p_min, bounds.p_max)
        rating += float(
            stats.xbar[prefix_arr] @ np.log(chain)
            + (stats.max_rating - stats.xbar[prefix_arr]) @ np.log1p(-chain)
        )
    # ranking term: decided pairs contribute their actual disagreement
    # counts, undecided pairs the smaller of the two
    n = stats.n_objects
    counts = stats.pair_counts
    disagreements = 0
    for i, u in enumerate(prefix):
        for v in prefix[i + 1 :]:
            disagreements += counts[v, u]
        disagreements += counts[free, u].sum()
    sub = counts[np.ix_(free, free)]
    disagreements += np.minimum(sub, sub.T)[np.triu_indices(free.size, 1)].sum()
    dbar_min = float(disagreements) / stats.n_judges
    theta, _ = theta_mle(dbar_min, n, bounds)
    rank = -theta * dbar_min - log_psi(theta, n)
    return stats.n_judges * (rank + rating) + stats.log_binom_const


def fit_best_first(data, bounds: ParamBounds = DEFAULT_BOUNDS) -> FitResult:
    """Joint MLE by best-first search over consensus prefixes.

    Maintains a queue of consensus prefixes ordered by an upper bound on the
    log-likelihood of any completion, expands the most promising prefix, and
    profiles full rankings as they appear.  Pruning keeps a small slack under
    the incumbent so floating-point noise in the bound can never discard an
    optimal branch, and exact ties go to the lexicographically smallest
    consensus.  Returns the same optimum as :func:`fit_exhaustive`.
    """
    stats = _as_stats(data)
    n = stats.n_objects
    free_rating = _free_rating_bounds(stats, bounds)
    queue: list[tuple[float, tuple[int, ...]]] = []
    best: ProfileFit | None = None
    candidates = 0
    nodes = 0

    def slack() -> float:
        return _PRUNE_SLACK * (1.0 + abs(best.loglik))

    def consider(perm: tuple[int, ...]):
        nonlocal best, candidates
        candidate = profile_loglik(stats, perm, bounds)
        candidates += 1
        if (
            best is None
            or candidate.loglik > best.loglik
            or (candidate.loglik == best.loglik and perm < tuple(best.consensus))
        ):
            best = candidate

    def expand(prefix: tuple[int, ...], free: np.ndarray):
        nonlocal nodes
        nodes += 1
        for obj in free:
            child = prefix + (int(obj),)
            rest = free[free != obj]
            if len(child) >= n - 1:
                consider(child + tuple(int(r) for r in rest))
            else:
                bound = _prefix_bound(stats, child, rest, free_rating, bounds)
                if best is None or bound >= best.loglik - slack():
                    heapq.heappush(queue, (-bound, child))

    expand((), np.arange(n, dtype=np.intp))
    while queue:
        neg_bound, prefix = heapq.heappop(queue)
        if best is not None and -neg_bound < best.loglik - slack():
            break
        prefix_set = set(prefix)
        free = np.array([o for o in range(n) if o not in prefix_set], dtype=np.intp)
        expand(prefix, free)
    return _result(best, "best_first", candidates, nodes)


def fit(
    data,
    bounds: ParamBounds = DEFAULT_BOUNDS,
    method: str = "auto",
    exhaustive_cap: int = 8,
) -> FitResult:
    """Joint MLE of consensus, qualities, and concentration.

    ``method`` is ``"exhaustive"``, ``"best-first"``, or ``"auto"`` (the
    default), which profiles every permutation up to ``exhaustive_cap``
    objects and switches to the equivalent best-first search beyond that.
    """
    stats = _as_stats(data)
    if method == "auto":
        method = "exhaustive" if stats.n_objects <= exhaustive_cap else "best-first"
    if method == "exhaustive":
        return fit_exhaustive(stats, bounds, exhaustive_cap)
    if method == "best-first":
        return fit_best_first(stats, bounds)
    raise ValueError(f"unknown method {method!r}; use auto, exhaustive, or best-first")
