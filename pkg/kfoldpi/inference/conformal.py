"""Split conformal and k-fold conformal prediction intervals around any regressor"""

import logging
import math
from typing import List, NamedTuple, Optional, Tuple

import numpy as np

from kfoldpi.data import Dataset
from kfoldpi.exceptions import DimensionMismatch, EmptyResiduals, InsufficientData
from kfoldpi.inference.regressors import Regressor, Trainer
from kfoldpi.inference.rng import RngStream, permutation
from kfoldpi.inference.utils.validations import validate_alpha

logger = logging.getLogger(__name__)

# level * (m + 1) within this distance of an integer is taken as that integer
RANK_TOLERANCE = 1e-9

KFOLD_CENTERS = ("refit", "average")

IntervalOptions = NamedTuple(
    "IntervalOptions", [("signed_quantiles", bool), ("kfold_center", str)]
)
IntervalOptions.__new__.__defaults__ = (False, "refit")
IntervalOptions.__doc__ = "Choose between the interval construction variants."
IntervalOptions.signed_quantiles.__doc__ = """If True, intervals are
    ``[y_hat + D_(alpha/2), y_hat + D_(1 - alpha/2)]`` from signed residual order
    statistics instead of the symmetric absolute-residual construction.
    """
IntervalOptions.kfold_center.__doc__ = """Source of k-fold interval centers: ``refit`` (one
    regressor trained on all observations) or ``average`` (mean of the k fold models).
    """

ResidualSet = NamedTuple(
    "ResidualSet",
    [("residuals", np.ndarray), ("source_fold", np.ndarray), ("indices", np.ndarray)],
)
ResidualSet.__doc__ = """Out-of-sample prediction errors ``D_i = Y_i - Y_hat_i``, aligned with
    the fold that produced them and the training index they belong to.
    """

PredictionInterval = NamedTuple(
    "PredictionInterval",
    [("center", float), ("lower", float), ("upper", float), ("alpha", float)],
)
PredictionInterval.__doc__ = "Interval for one test point at nominal level ``1 - alpha``."


class ConformalModel:
    """A fitted split or k-fold conformal interval constructor

    Attributes
    ----------

    kind : str
        ``split`` or ``kfold``.
    k : int
        Number of folds (2 for split: the two halves).
    models : List[Regressor]
        One model for split, k fold models for k-fold.
    refit_model : Optional[Regressor]
        Regressor producing test-point centers; the L1 model for split, the all-data
        refit for k-fold (None when centers average the fold models).
    residuals : ResidualSet
        Calibration residuals.
    alpha : float
        Miscoverage level.
    half_width : float
        Conformal quantile of the absolute residuals at level ``1 - alpha``.
    options : IntervalOptions
        Construction variant.
    lower_offset, upper_offset : float
        Offsets added to the center; ``-half_width`` and ``+half_width`` unless signed
        quantiles were requested.
    """

    def __init__(
        self,
        kind: str,
        k: int,
        models: List[Regressor],
        refit_model: Optional[Regressor],
        residuals: ResidualSet,
        alpha: float,
        options: IntervalOptions,
    ):
        """Constructor method"""
        if kind == "kfold" and len(models) != k:
            raise ValueError(f"A {k}-fold model needs exactly {k} fold models.")
        self.kind = kind
        self.k = k
        self.models = models
        self.refit_model = refit_model
        self.residuals = residuals
        self.alpha = alpha
        self.options = options
        self.half_width = conformal_quantile(residuals.residuals, 1.0 - alpha)
        if options.signed_quantiles:
            self.lower_offset, self.upper_offset = signed_quantiles(residuals.residuals, alpha)
        else:
            self.lower_offset, self.upper_offset = -self.half_width, self.half_width

    def centers(self, x: np.ndarray) -> np.ndarray:
        """Point predictions for every row of ``x``"""
        if self.refit_model is not None:
            return self.refit_model.predict(x)
        return np.mean([model.predict(x) for model in self.models], axis=0)

    def get_parameters(self) -> dict:
        return {
            "kind": self.kind,
            "k": self.k,
            "alpha": self.alpha,
            "half_width": self.half_width,
            "options": self.options._asdict(),
            "residual_count": int(self.residuals.residuals.shape[0]),
        }


def conformal_rank(level: float, m: int) -> int:
    """One-based rank ``ceil(level * (m + 1))`` of the conformal order statistic, unclipped"""
    return max(1, math.ceil(level * (m + 1) - RANK_TOLERANCE))


def conformal_quantile(residuals, level: float) -> float:
    """The finite-sample conformal quantile of the absolute residuals

    Returns the ``r``-th smallest of ``|D_1|, ..., |D_m|`` with
    ``r = ceil(level * (m + 1))`` clipped to ``m``. Ties resolve through the order
    statistics themselves.

    Parameters
    ----------

    residuals : array-like
        The ``m >= 1`` residuals ``D_i``.
    level : float
        Quantile level in (0, 1), typically ``1 - alpha``.

    Returns
    -------

    float
        A non-negative half-width.

    Raises
    ------

    EmptyResiduals
        No residuals were supplied
    """
    magnitudes = np.abs(np.asarray(residuals, dtype=np.float64).ravel())
    m = magnitudes.shape[0]
    if m == 0:
        raise EmptyResiduals("The conformal quantile needs at least one residual.")
    if not 0 < level < 1:
        raise ValueError("The quantile level must lie strictly between 0 and 1.")
    rank = conformal_rank(level, m)
    if rank > m:
        logger.warning(
            f"Conformal rank {rank} exceeds the {m} available residuals; clipped to {m}. "
            "Finite-sample coverage may fall short of the nominal level."
        )
        rank = m
    return float(np.partition(magnitudes, rank - 1)[rank - 1])


def signed_quantiles(residuals, alpha: float) -> Tuple[float, float]:
    """Lower and upper signed residual order statistics at ``alpha / 2`` and ``1 - alpha / 2``

    The lower offset is the ``max(1, floor((alpha / 2) * (m + 1)))``-th smallest signed
    residual, the upper offset the ``min(m, ceil((1 - alpha / 2) * (m + 1)))``-th.
    """
    ordered = np.sort(np.asarray(residuals, dtype=np.float64).ravel())
    m = ordered.shape[0]
    if m == 0:
        raise EmptyResiduals("Signed quantiles need at least one residual.")
    lower_rank = max(1, math.floor((alpha / 2) * (m + 1) + RANK_TOLERANCE))
    upper_rank = min(m, conformal_rank(1.0 - alpha / 2, m))
    return float(ordered[min(lower_rank, m) - 1]), float(ordered[upper_rank - 1])


def split_conformal(
    data: Dataset,
    trainer: Trainer,
    alpha: float,
    stream: RngStream,
    options: IntervalOptions = IntervalOptions(),
) -> ConformalModel:
    """Split conformal prediction intervals

    The indices are shuffled with ``stream.child(0)``; the first ``ceil(n / 2)`` form
    L1, on which one regressor is trained (with ``stream.child(1)``), and the rest form
    L2, whose residuals calibrate the half-width. Test-point centers come from the L1
    model.

    Raises
    ------

    InsufficientData
        Fewer than four observations
    """
    validate_alpha(alpha)
    if data.n < 4:
        raise InsufficientData("Split conformal needs at least 4 observations.")

    order = permutation(stream.child(0), data.n)
    first_half = np.sort(order[: math.ceil(data.n / 2)])
    second_half = np.sort(order[math.ceil(data.n / 2) :])

    model = trainer.fit(data.subset(first_half), stream.child(1))
    residuals = data.y[second_half] - model.predict(data.x[second_half])
    residual_set = ResidualSet(
        residuals=residuals,
        source_fold=np.ones(second_half.shape[0], dtype=np.int64),
        indices=second_half,
    )
    return ConformalModel(
        kind="split",
        k=2,
        models=[model],
        refit_model=model,
        residuals=residual_set,
        alpha=alpha,
        options=options,
    )


def kfold_partition(n: int, k: int, stream: RngStream) -> List[np.ndarray]:
    """Randomly split ``range(n)`` into k folds whose sizes differ by at most one

    After a seeded shuffle the first ``n mod k`` folds receive one extra index. Each
    fold is returned sorted.
    """
    if k < 2:
        raise ValueError("The number of folds must be at least 2.")
    if n < k:
        raise InsufficientData(f"Cannot split {n} observations into {k} folds.")
    return [np.sort(fold) for fold in np.array_split(permutation(stream, n), k)]


def kfold_conformal(
    data: Dataset,
    trainer: Trainer,
    k: int,
    alpha: float,
    stream: RngStream,
    options: IntervalOptions = IntervalOptions(),
) -> ConformalModel:
    """k-fold conformal prediction intervals

    Folds come from ``kfold_partition`` on ``stream.child(0)``. Fold model ``j`` is
    trained on every other fold with ``stream.child(1 + j)`` and yields the residuals of
    the observations in fold ``j``, so every training index contributes exactly one
    residual. Residuals are assembled by training index, independent of the order in
    which folds finish. Test-point centers come from a regressor refit on all
    observations with ``stream.child(k + 1)``, or from the average of the fold models.

    Raises
    ------

    InsufficientData
        Fewer than ``2 * k`` observations
    """
    validate_alpha(alpha)
    if k < 2:
        raise ValueError("The number of folds must be at least 2.")
    if data.n < 2 * k:
        raise InsufficientData(
            f"{k}-fold conformal needs at least {2 * k} observations, got {data.n}."
        )
    if options.kfold_center not in KFOLD_CENTERS:
        raise ValueError(f"kfold_center must be one of {KFOLD_CENTERS}.")

    folds = kfold_partition(data.n, k, stream.child(0))
    residuals = np.empty(data.n)
    source_fold = np.empty(data.n, dtype=np.int64)
    models = []
    for j, held_out in enumerate(folds):
        in_fold = np.zeros(data.n, dtype=bool)
        in_fold[held_out] = True
        model = trainer.fit(data.subset(np.flatnonzero(~in_fold)), stream.child(1 + j))
        residuals[held_out] = data.y[held_out] - model.predict(data.x[held_out])
        source_fold[held_out] = j
        models.append(model)

    refit_model = None
    if options.kfold_center == "refit":
        refit_model = trainer.fit(data, stream.child(k + 1))

    return ConformalModel(
        kind="kfold",
        k=k,
        models=models,
        refit_model=refit_model,
        residuals=ResidualSet(residuals, source_fold, np.arange(data.n)),
        alpha=alpha,
        options=options,
    )


def predict_intervals(model: ConformalModel, x) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Centers, lower and upper bounds for every row of ``x``"""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2:
        raise DimensionMismatch(f"Expected a matrix of predictors, got shape {x.shape}.")
    centers = model.centers(x)
    return centers, centers + model.lower_offset, centers + model.upper_offset


def predict_interval(model: ConformalModel, x) -> PredictionInterval:
    """The prediction interval of a single predictor vector ``x``

    The interval is ``[y_hat - half_width, y_hat + half_width]``; its width is the same
    for every ``x``.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise DimensionMismatch(f"Expected a predictor vector, got shape {x.shape}.")
    centers, lower, upper = predict_intervals(model, x[None, :])
    return PredictionInterval(
        center=float(centers[0]), lower=float(lower[0]), upper=float(upper[0]), alpha=model.alpha
    )
