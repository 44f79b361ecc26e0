"""Regressor and trainer blueprints used by the conformal methods"""

from abc import ABCMeta, abstractmethod
from typing import Callable

import numpy as np

from kfoldpi.data import Dataset
from kfoldpi.inference.rng import RngStream


class Regressor(metaclass=ABCMeta):
    """Blueprint for a fitted mean-function estimate m_hat(X)"""

    @abstractmethod
    def predict(self, x: np.ndarray) -> np.ndarray:
        """Predict the mean response for every row of ``x``

        Parameters
        ----------

        x : numpy.ndarray
            Matrix of shape ``(rows, p)``.

        Returns
        -------

        numpy.ndarray
            Vector of ``rows`` predictions.
        """
        pass


class Trainer(metaclass=ABCMeta):
    """Blueprint for a regressor-training procedure

    A trainer is handed a training ``Dataset`` and an ``RngStream`` it owns for the
    duration of the fit. Trainers are passed to worker processes, so implementations
    must be picklable.
    """

    @abstractmethod
    def fit(self, data: Dataset, stream: RngStream) -> Regressor:
        """Fit a regressor on ``data`` using randomness from ``stream`` only"""
        pass

    def get_parameters(self) -> dict:
        """Default implementation of the get_parameters method

        Returns
        -------

        dict
            A dictionary copy of the trainer's configuration.
        """
        params = vars(self).copy()
        params["trainer"] = self.__class__.__name__
        return params


class ConstantRegressor(Regressor):
    """Predicts the same value everywhere"""

    def __init__(self, value: float = 0.0):
        self.value = float(value)

    def predict(self, x: np.ndarray) -> np.ndarray:
        return np.full(np.asarray(x).shape[0], self.value)


class ConstantTrainer(Trainer):
    """Ignores the data and returns a ``ConstantRegressor``"""

    def __init__(self, value: float = 0.0):
        self.value = float(value)

    def fit(self, data: Dataset, stream: RngStream) -> Regressor:
        return ConstantRegressor(self.value)


class FunctionRegressor(Regressor):
    """Wraps a known, row-vectorised mean function"""

    def __init__(self, function: Callable[[np.ndarray], np.ndarray]):
        self.function = function

    def predict(self, x: np.ndarray) -> np.ndarray:
        return np.asarray(self.function(np.asarray(x, dtype=np.float64)), dtype=np.float64)


class OracleTrainer(Trainer):
    """Returns the true mean function regardless of the data

    Used to check conformal validity analytically with the network bypassed.

    Attributes
    ----------

    function : Callable[[numpy.ndarray], numpy.ndarray]
        Picklable row-vectorised mean function, e.g. ``MeanFunction("linear")``.
    """

    def __init__(self, function: Callable[[np.ndarray], np.ndarray]):
        self.function = function

    def fit(self, data: Dataset, stream: RngStream) -> Regressor:
        return FunctionRegressor(self.function)

    def get_parameters(self) -> dict:
        return {"trainer": self.__class__.__name__, "function": repr(self.function)}
