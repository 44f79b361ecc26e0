"""Synthetic regression data for the factorial simulation design"""

import logging
from typing import Callable, Dict, List, NamedTuple, Tuple, Union

import numpy as np

from kfoldpi.data import Dataset
from kfoldpi.exceptions import DimensionMismatch, InvalidRho
from kfoldpi.inference.linalg import cholesky_lower, correlate_rows
from kfoldpi.inference.rng import (
    RngStream,
    derive_stream,
    sample_normal_matrix,
    sample_scaled_t3,
    sample_std_normal,
)

logger = logging.getLogger(__name__)

MEAN_FUNCTIONS = ("linear", "nonlinear", "nonlinear_interaction")
ERROR_DISTRIBUTIONS = ("homoscedastic", "heavy_tailed", "heteroscedastic")
PAPER_SAMPLE_SIZES = (500, 2500, 5000)

ABS_MEAN_SAMPLES = 10**6
ABS_MEAN_DOMAIN = 2
_MC_CHUNK = 100_000

ScenarioSpec = NamedTuple(
    "ScenarioSpec",
    [
        ("mean_fn", str),
        ("error_dist", str),
        ("n_train", int),
        ("p", int),
        ("rho", float),
        ("n_test", int),
        ("replicates", int),
        ("het_as_sd", bool),
    ],
)
ScenarioSpec.__new__.__defaults__ = (10, 0.6, 500, 50, False)
ScenarioSpec.__doc__ = "One cell of the simulation design. Defaults follow the study."
ScenarioSpec.mean_fn.__doc__ = "One of ``linear``, ``nonlinear``, ``nonlinear_interaction``."
ScenarioSpec.error_dist.__doc__ = "One of ``homoscedastic``, ``heavy_tailed``, ``heteroscedastic``."
ScenarioSpec.n_train.__doc__ = "Training observations per replicate (500, 2500 or 5000)."
ScenarioSpec.p.__doc__ = "Number of predictors."
ScenarioSpec.rho.__doc__ = "AR(1) correlation of neighbouring predictors."
ScenarioSpec.n_test.__doc__ = "Independent test observations per replicate."
ScenarioSpec.replicates.__doc__ = "Number of simulated datasets."
ScenarioSpec.het_as_sd.__doc__ = """Read the heteroscedastic scale ``1/2 + |m(X)| / (2 E|m(X)|)``
    as a standard deviation instead of a variance.
    """


def scenario_name(spec: ScenarioSpec) -> str:
    """Identifier of a scenario in records and file names, e.g. ``linear-homoscedastic-500``"""
    return f"{spec.mean_fn}-{spec.error_dist}-{spec.n_train}"


def validate_scenario(spec: ScenarioSpec) -> None:
    if spec.mean_fn not in MEAN_FUNCTIONS:
        raise ValueError(f"Unknown mean function '{spec.mean_fn}'; expected {MEAN_FUNCTIONS}.")
    if spec.error_dist not in ERROR_DISTRIBUTIONS:
        raise ValueError(
            f"Unknown error distribution '{spec.error_dist}'; expected {ERROR_DISTRIBUTIONS}."
        )
    for field in ("n_train", "n_test", "replicates"):
        if int(getattr(spec, field)) < 1:
            raise ValueError(f"ScenarioSpec.{field} must be a positive integer.")
    if int(spec.p) < 2:
        raise DimensionMismatch("The mean functions need at least two predictors.")
    if not -1 < spec.rho < 1:
        raise InvalidRho(f"rho must lie strictly between -1 and 1, got {spec.rho}.")


def paper_scenario_grid(replicates: int = 50, n_test: int = 500) -> List[ScenarioSpec]:
    """The full 3 x 3 x 3 factorial design (27 scenarios)"""
    return [
        ScenarioSpec(mean_fn, error_dist, n_train, n_test=n_test, replicates=replicates)
        for mean_fn in MEAN_FUNCTIONS
        for error_dist in ERROR_DISTRIBUTIONS
        for n_train in PAPER_SAMPLE_SIZES
    ]


def ar1_covariance(p: int, rho: float) -> np.ndarray:
    """AR(1) covariance ``sigma[i][j] = rho ** |i - j|`` with unit diagonal

    Raises
    ------

    InvalidRho
        ``|rho| >= 1``
    """
    if not -1 < rho < 1:
        raise InvalidRho(f"rho must lie strictly between -1 and 1, got {rho}.")
    if int(p) < 1:
        raise ValueError("p must be a positive integer.")
    lags = np.abs(np.subtract.outer(np.arange(p), np.arange(p)))
    return np.power(float(rho), lags).astype(np.float64)


def mean_values(mean_fn: str, x: np.ndarray) -> np.ndarray:
    """Evaluate a mean function on every row of ``x`` (only the first two columns matter)

    * ``linear``: ``x1 + x2``
    * ``nonlinear``: ``2 exp(-|x1| - |x2|)``
    * ``nonlinear_interaction``: ``2 exp(-|x1| - |x2|) + x1 x2``
    """
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] < 2:
        raise DimensionMismatch("Mean functions need rows with at least two predictors.")
    x1, x2 = x[:, 0], x[:, 1]
    if mean_fn == "linear":
        return x1 + x2
    bump = 2.0 * np.exp(-np.abs(x1) - np.abs(x2))
    if mean_fn == "nonlinear":
        return bump
    if mean_fn == "nonlinear_interaction":
        return bump + x1 * x2
    raise ValueError(f"Unknown mean function '{mean_fn}'; expected {MEAN_FUNCTIONS}.")


def mean_value(mean_fn: str, x) -> float:
    """Evaluate a mean function at a single predictor vector"""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1 or x.shape[0] < 2:
        raise DimensionMismatch("Mean functions need a predictor vector of length at least 2.")
    return float(mean_values(mean_fn, x[None, :])[0])


class MeanFunction:
    """Picklable row-vectorised callable for a named mean function"""

    def __init__(self, mean_fn: str):
        if mean_fn not in MEAN_FUNCTIONS:
            raise ValueError(f"Unknown mean function '{mean_fn}'; expected {MEAN_FUNCTIONS}.")
        self.mean_fn = mean_fn

    def __call__(self, x: np.ndarray) -> np.ndarray:
        return mean_values(self.mean_fn, x)

    def __repr__(self) -> str:
        return f"MeanFunction({self.mean_fn!r})"


def sample_predictors(stream: RngStream, rows: int, p: int, rho: float) -> np.ndarray:
    """Draw ``rows`` predictor vectors from ``N(0, AR(1)(p, rho))``"""
    lower = cholesky_lower(ar1_covariance(p, rho))
    return correlate_rows(lower, sample_normal_matrix(stream, (rows, p)))


def estimate_abs_mean(
    mean_fn: Union[str, Callable[[np.ndarray], np.ndarray]],
    p: int,
    rho: float,
    stream: RngStream,
    mc_samples: int = ABS_MEAN_SAMPLES,
) -> float:
    """Monte Carlo estimate of ``E|m(X)|`` under ``X ~ N(0, AR(1)(p, rho))``

    Draws are made in chunks of 100,000 rows from ``stream``.

    Parameters
    ----------

    mean_fn : Union[str, Callable]
        A mean-function name or a row-vectorised callable.
    p, rho :
        Predictor design.
    stream : RngStream
        Dedicated stream; the estimate is a pure function of it.
    mc_samples : int
        Number of draws, at least 10,000.
    """
    if int(mc_samples) < 10**4:
        raise ValueError("estimate_abs_mean needs at least 10,000 Monte Carlo samples.")
    function = MeanFunction(mean_fn) if isinstance(mean_fn, str) else mean_fn
    lower = cholesky_lower(ar1_covariance(p, rho))
    total, remaining = 0.0, int(mc_samples)
    while remaining:
        rows = min(_MC_CHUNK, remaining)
        x = correlate_rows(lower, sample_normal_matrix(stream, (rows, p)))
        total += float(np.sum(np.abs(function(x))))
        remaining -= rows
    return total / int(mc_samples)


_ABS_MEAN_CACHE: Dict[Tuple[str, int, float, int], float] = {}


def scenario_abs_mean(mean_fn: str, p: int, rho: float, master_seed: int) -> float:
    """Cached ``E|m(X)|`` of a scenario, estimated on its dedicated stream"""
    key = (mean_fn, int(p), float(rho), int(master_seed))
    if key not in _ABS_MEAN_CACHE:
        rho_key = int(round((float(rho) + 1.0) * 1e6))
        stream = derive_stream(
            master_seed, [ABS_MEAN_DOMAIN, MEAN_FUNCTIONS.index(mean_fn), int(p), rho_key]
        )
        _ABS_MEAN_CACHE[key] = estimate_abs_mean(mean_fn, p, rho, stream)
        logger.debug(f"E|m(X)| for {key[:3]} estimated as {_ABS_MEAN_CACHE[key]:.6f}")
    return _ABS_MEAN_CACHE[key]


def sample_errors(
    error_dist: str,
    means: np.ndarray,
    stream: RngStream,
    abs_mean: float = 1.0,
    het_as_sd: bool = False,
) -> np.ndarray:
    """Draw the additive errors for responses with conditional means ``means``

    * ``homoscedastic``: ``N(0, 1)``
    * ``heavy_tailed``: ``t3 / sqrt(3)``
    * ``heteroscedastic``: ``N(0, s(X))`` with ``s(X) = 1/2 + |m(X)| / (2 E|m(X)|)`` read
      as a variance (default) or as a standard deviation (``het_as_sd``)
    """
    count = means.shape[0]
    if error_dist == "homoscedastic":
        return sample_std_normal(stream, count)
    if error_dist == "heavy_tailed":
        return sample_scaled_t3(stream, count)
    if error_dist == "heteroscedastic":
        scale = 0.5 + 0.5 * np.abs(means) / abs_mean
        sd = scale if het_as_sd else np.sqrt(scale)
        return sd * sample_std_normal(stream, count)
    raise ValueError(f"Unknown error distribution '{error_dist}'; expected {ERROR_DISTRIBUTIONS}.")


def _draw(spec: ScenarioSpec, rows: int, stream: RngStream, abs_mean: float) -> Dataset:
    x = sample_predictors(stream.child(0), rows, spec.p, spec.rho)
    means = mean_values(spec.mean_fn, x)
    errors = sample_errors(spec.error_dist, means, stream.child(1), abs_mean, spec.het_as_sd)
    return Dataset(x, means + errors, name=scenario_name(spec))


def generate_dataset(
    spec: ScenarioSpec,
    replicate_id: int,
    stream: RngStream,
    abs_mean: float = None,
) -> Tuple[Dataset, Dataset]:
    """Simulate the training and test sets of one replicate

    ``Y = m(X) + eps`` with ``X ~ N(0, AR(1)(p, rho))``. The training set uses
    ``stream.child(replicate_id, 0)`` and the test set ``stream.child(replicate_id, 1)``,
    so the two are independent and no draw is reused.

    Parameters
    ----------

    spec : ScenarioSpec
    replicate_id : int
    stream : RngStream
        The scenario's stream.
    abs_mean : float
        ``E|m(X)|`` for heteroscedastic errors; estimated and cached on the scenario's
        dedicated stream when omitted.

    Returns
    -------

    Tuple[Dataset, Dataset]
        ``(train, test)`` with ``n_train`` and ``n_test`` rows.
    """
    validate_scenario(spec)
    if spec.error_dist == "heteroscedastic" and abs_mean is None:
        abs_mean = scenario_abs_mean(spec.mean_fn, spec.p, spec.rho, stream.master_seed)
    if abs_mean is None:
        abs_mean = 1.0
    train = _draw(spec, spec.n_train, stream.child(replicate_id, 0), abs_mean)
    test = _draw(spec, spec.n_test, stream.child(replicate_id, 1), abs_mean)
    return train, test


def parse_scenario(text: str, **fields) -> ScenarioSpec:
    """Parse ``mean:error:n`` (or the record identifier ``mean-error-n``)

    Keyword arguments set the remaining ScenarioSpec fields, e.g. ``replicates``.
    """
    separator = ":" if ":" in text else "-"
    parts = text.strip().split(separator)
    if len(parts) != 3 or not parts[2].isdigit():
        raise ValueError(
            f"Cannot parse scenario '{text}'. Expected mean:error:n, "
            "e.g. linear:homoscedastic:500."
        )
    spec = ScenarioSpec(parts[0], parts[1], int(parts[2]), **fields)
    validate_scenario(spec)
    return spec
