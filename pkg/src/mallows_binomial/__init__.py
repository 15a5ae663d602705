"""Joint ranking-and-rating model with a shared consensus ordering.

Rankings follow a Mallows model under the Kendall tau distance and ratings
follow per-object Binomial distributions whose success probabilities double
as quality scores: smaller means better, and sorting them yields the modal
ranking.  The package fits the model by maximum likelihood, quantifies
uncertainty by nonparametric bootstrap, and checks the estimator's
large-sample behavior by simulation.
"""

from .estimation import (
    FitResult,
    ProfileFit,
    constrained_p_mle,
    fit,
    fit_best_first,
    fit_exhaustive,
    profile_loglik,
    theta_mle,
)
from .model import (
    DEFAULT_BOUNDS,
    Dataset,
    ParamBounds,
    Params,
    SufficientStats,
    as_ranking,
    distance_mean_var,
    distance_variance,
    expected_distance,
    kendall_distance,
    log_likelihood,
    log_psi,
    max_kendall_distance,
    order_of,
    psi,
)
from .sampling import (
    derive_seed,
    sample_dataset,
    sample_mallows,
    sample_ratings,
    spawn_rng,
)

__version__ = "0.1.0"

__all__ = [
    "DEFAULT_BOUNDS",
    "Dataset",
    "FitResult",
    "ParamBounds",
    "Params",
    "ProfileFit",
    "SufficientStats",
    "as_ranking",
    "constrained_p_mle",
    "derive_seed",
    "distance_mean_var",
    "distance_variance",
    "expected_distance",
    "fit",
    "fit_best_first",
    "fit_exhaustive",
    "kendall_distance",
    "log_likelihood",
    "log_psi",
    "max_kendall_distance",
    "order_of",
    "profile_loglik",
    "psi",
    "sample_dataset",
    "sample_mallows",
    "sample_ratings",
    "spawn_rng",
    "theta_mle",
    "__version__",
]
