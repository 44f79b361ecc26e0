"""Feed-forward network regressor trained with hand-coded backpropagation and Adam"""

import logging
from typing import List, NamedTuple, Optional, Tuple

import numpy as np

from kfoldpi.data import Dataset
from kfoldpi.exceptions import DimensionMismatch, NonFiniteLoss
from kfoldpi.inference.linalg import matvec
from kfoldpi.inference.regressors import Regressor, Trainer
from kfoldpi.inference.rng import RngStream, sample_indices, sample_uniform

logger = logging.getLogger(__name__)

ACTIVATIONS = ("relu", "tanh")

MlpConfig = NamedTuple(
    "MlpConfig",
    [
        ("input_dim", int),
        ("hidden_layers", Tuple[int, ...]),
        ("activation", str),
        ("learning_rate", float),
        ("batch_size", int),
        ("iterations", int),
        ("adam_beta1", float),
        ("adam_beta2", float),
        ("adam_epsilon", float),
    ],
)
MlpConfig.__new__.__defaults__ = ("relu", 0.0003, 32, 20000, 0.9, 0.999, 1e-8)
MlpConfig.__doc__ = "Architecture and optimizer settings of an MlpRegressor."
MlpConfig.input_dim.__doc__ = "Number of predictors the network consumes."
MlpConfig.hidden_layers.__doc__ = "Widths of the fully connected hidden layers, e.g. ``(15, 15)``."
MlpConfig.activation.__doc__ = "Hidden-layer activation, one of ``relu`` or ``tanh``."
MlpConfig.learning_rate.__doc__ = """Adam step size. The recipe's "0.03%" is 0.0003."""
MlpConfig.batch_size.__doc__ = "Rows drawn (with replacement) per optimizer step."
MlpConfig.iterations.__doc__ = "Number of Adam steps; steps, not epochs."
MlpConfig.adam_beta1.__doc__ = "Exponential decay of the first moment estimate."
MlpConfig.adam_beta2.__doc__ = "Exponential decay of the second moment estimate."
MlpConfig.adam_epsilon.__doc__ = "Denominator guard of the Adam update."

SIMULATION_MLP_CONFIG = MlpConfig(
    input_dim=10, hidden_layers=(15, 15), batch_size=32, iterations=20000
)
REAL_DATA_MLP_CONFIG = MlpConfig(
    input_dim=1, hidden_layers=(10, 10), batch_size=16, iterations=25000
)

ParameterSet = NamedTuple(
    "ParameterSet", [("weights", List[np.ndarray]), ("biases", List[np.ndarray])]
)
ParameterSet.__doc__ = """Arrays congruent to a network's parameters (gradients, moments)."""


def validate_mlp_config(config: MlpConfig) -> None:
    """Check the MlpConfig invariants

    Raises
    ------

    ValueError
        A field is outside its documented domain.
    """
    if int(config.input_dim) < 1:
        raise ValueError("MlpConfig.input_dim must be a positive integer.")
    if len(config.hidden_layers) < 1 or any(int(w) < 1 for w in config.hidden_layers):
        raise ValueError("MlpConfig.hidden_layers must be a nonempty list of positive widths.")
    if config.activation not in ACTIVATIONS:
        raise ValueError(f"MlpConfig.activation must be one of {ACTIVATIONS}.")
    if not config.learning_rate > 0:
        raise ValueError("MlpConfig.learning_rate must be positive.")
    if int(config.iterations) < 1:
        raise ValueError("MlpConfig.iterations must be at least 1.")
    if int(config.batch_size) < 1:
        raise ValueError("MlpConfig.batch_size must be at least 1.")
    for name in ("adam_beta1", "adam_beta2"):
        if not 0 < getattr(config, name) < 1:
            raise ValueError(f"MlpConfig.{name} must lie strictly between 0 and 1.")
    if not config.adam_epsilon > 0:
        raise ValueError("MlpConfig.adam_epsilon must be positive.")


class MlpRegressor(Regressor):
    """A fully connected network with a single linear output unit

    Attributes
    ----------

    config : MlpConfig
        Configuration the network was built from.
    weights : List[numpy.ndarray]
        One ``(fan_out, fan_in)`` matrix per layer, the output layer last.
    biases : List[numpy.ndarray]
        One vector per layer.
    trained : bool
        Set once ``train`` has run its iterations.
    loss_history : Optional[numpy.ndarray]
        Mini-batch loss of every iteration, filled by ``train``.
    training_mse : Optional[float]
        Mean squared error on the full training set after training.
    adam_steps : int
        Number of optimizer updates applied by ``train``.
    """

    def __init__(
        self,
        config: MlpConfig,
        weights: List[np.ndarray],
        biases: List[np.ndarray],
        trained: bool = False,
    ):
        """Constructor method"""
        if len(weights) != len(biases) or not weights:
            raise DimensionMismatch("A network needs one bias vector per weight matrix.")
        weights = [np.array(w, dtype=np.float64, ndmin=2) for w in weights]
        biases = [np.array(b, dtype=np.float64, ndmin=1) for b in biases]
        fan_in = config.input_dim
        for layer, (w, b) in enumerate(zip(weights, biases)):
            if w.shape[1] != fan_in or b.shape != (w.shape[0],):
                raise DimensionMismatch(
                    f"Layer {layer} has weights {w.shape} and biases {b.shape}, which do "
                    f"not chain from {fan_in} inputs."
                )
            fan_in = w.shape[0]
        if fan_in != 1:
            raise DimensionMismatch("The output layer must have exactly one unit.")
        self.config = config
        self.weights = weights
        self.biases = biases
        self.trained = trained
        self.loss_history: Optional[np.ndarray] = None
        self.training_mse: Optional[float] = None
        self.adam_steps = 0

    def predict(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        if x.ndim != 2 or x.shape[1] != self.config.input_dim:
            raise DimensionMismatch(
                f"Expected rows of length {self.config.input_dim}, got shape {x.shape}."
            )
        pre_activations, activations = _forward_batch(self, x)
        return pre_activations[-1][:, 0]

    def copy(self) -> "MlpRegressor":
        """Deep copy of the parameters"""
        clone = MlpRegressor(
            self.config,
            [w.copy() for w in self.weights],
            [b.copy() for b in self.biases],
            self.trained,
        )
        clone.loss_history = self.loss_history
        clone.training_mse = self.training_mse
        clone.adam_steps = self.adam_steps
        return clone

    def parameter_count(self) -> int:
        return int(sum(w.size + b.size for w, b in zip(self.weights, self.biases)))


class AdamState:
    """First and second moment estimates of Adam

    Attributes
    ----------

    first_moment : ParameterSet
    second_moment : ParameterSet
    step_count : int
        Number of updates applied so far.
    """

    def __init__(self, model: MlpRegressor):
        """Constructor method"""
        self.first_moment = _zeros_like(model)
        self.second_moment = _zeros_like(model)
        self.step_count = 0


def _zeros_like(model: MlpRegressor) -> ParameterSet:
    return ParameterSet(
        [np.zeros_like(w) for w in model.weights], [np.zeros_like(b) for b in model.biases]
    )


def _activate(activation: str, z: np.ndarray) -> np.ndarray:
    if activation == "relu":
        return np.maximum(z, 0.0)
    return np.tanh(z)


def _activation_derivative(activation: str, z: np.ndarray, a: np.ndarray) -> np.ndarray:
    if activation == "relu":
        return (z > 0.0).astype(np.float64)
    return 1.0 - a**2


def _forward_batch(model: MlpRegressor, x: np.ndarray):
    """Return the pre-activations of every layer and the activations feeding them"""
    activations = [x]
    pre_activations = []
    last = len(model.weights) - 1
    for layer, (w, b) in enumerate(zip(model.weights, model.biases)):
        z = activations[-1] @ w.T + b
        pre_activations.append(z)
        if layer < last:
            activations.append(_activate(model.config.activation, z))
    return pre_activations, activations


def xavier_init(config: MlpConfig, stream: RngStream) -> MlpRegressor:
    """Glorot-uniform initialization

    Each weight is uniform on ``[-sqrt(6 / (fan_in + fan_out)), +sqrt(...)]``; biases
    start at zero. Layers are drawn in order from input to output.
    """
    validate_mlp_config(config)
    widths = [int(config.input_dim), *[int(w) for w in config.hidden_layers], 1]
    weights, biases = [], []
    for fan_in, fan_out in zip(widths[:-1], widths[1:]):
        limit = np.sqrt(6.0 / (fan_in + fan_out))
        weights.append(sample_uniform(stream, -limit, limit, (fan_out, fan_in)))
        biases.append(np.zeros(fan_out))
    return MlpRegressor(config, weights, biases, trained=False)


def forward(model: MlpRegressor, x) -> float:
    """Prediction for a single predictor vector ``x``"""
    a = np.asarray(x, dtype=np.float64)
    if a.ndim != 1 or a.shape[0] != model.config.input_dim:
        raise DimensionMismatch(
            f"Expected a predictor vector of length {model.config.input_dim}, "
            f"got shape {a.shape}."
        )
    last = len(model.weights) - 1
    for layer, (w, b) in enumerate(zip(model.weights, model.biases)):
        z = matvec(w, a) + b
        a = z if layer == last else _activate(model.config.activation, z)
    return float(a[0])


def mse_loss_and_gradients(
    model: MlpRegressor, batch_x: np.ndarray, batch_y: np.ndarray
) -> Tuple[float, ParameterSet]:
    """Mean squared error of a batch and its exact gradient

    Parameters
    ----------

    model : MlpRegressor
    batch_x : numpy.ndarray
        ``(batch, input_dim)`` predictors.
    batch_y : numpy.ndarray
        ``batch`` responses.

    Returns
    -------

    Tuple[float, ParameterSet]
        The loss ``mean((m_hat(x) - y) ** 2)`` and its derivative with respect to every
        weight and bias.
    """
    batch_x = np.asarray(batch_x, dtype=np.float64)
    batch_y = np.asarray(batch_y, dtype=np.float64)
    if batch_x.ndim != 2 or batch_x.shape[0] < 1:
        raise DimensionMismatch("The batch must be a nonempty matrix of predictors.")
    if batch_x.shape[1] != model.config.input_dim or batch_y.shape != (batch_x.shape[0],):
        raise DimensionMismatch(
            f"Batch shapes {batch_x.shape} and {batch_y.shape} do not match a network "
            f"with {model.config.input_dim} inputs."
        )

    pre_activations, activations = _forward_batch(model, batch_x)
    residual = pre_activations[-1][:, 0] - batch_y
    loss = float(np.mean(residual**2))

    grad_weights = [None] * len(model.weights)
    grad_biases = [None] * len(model.biases)
    delta = (2.0 / batch_x.shape[0]) * residual[:, None]
    for layer in range(len(model.weights) - 1, -1, -1):
        grad_weights[layer] = delta.T @ activations[layer]
        grad_biases[layer] = delta.sum(axis=0)
        if layer > 0:
            z = pre_activations[layer - 1]
            a = activations[layer]
            delta = (delta @ model.weights[layer]) * _activation_derivative(
                model.config.activation, z, a
            )
    return loss, ParameterSet(grad_weights, grad_biases)


def adam_step(
    model: MlpRegressor, state: AdamState, gradients: ParameterSet
) -> Tuple[MlpRegressor, AdamState]:
    """Apply one bias-corrected Adam update in place and return ``(model, state)``"""
    config = model.config
    beta1, beta2 = config.adam_beta1, config.adam_beta2
    state.step_count += 1
    correction1 = 1.0 - beta1**state.step_count
    correction2 = 1.0 - beta2**state.step_count
    parameters = (model.weights, model.biases)
    moments = (state.first_moment, state.second_moment)
    for group, (params, grads) in enumerate(zip(parameters, gradients)):
        for index, (param, grad) in enumerate(zip(params, grads)):
            m = moments[0][group][index]
            v = moments[1][group][index]
            m *= beta1
            m += (1.0 - beta1) * grad
            v *= beta2
            v += (1.0 - beta2) * grad**2
            param -= config.learning_rate * (m / correction1) / (
                np.sqrt(v / correction2) + config.adam_epsilon
            )
    return model, state


def train(config: MlpConfig, data: Dataset, stream: RngStream) -> MlpRegressor:
    """Train a network on ``data`` with mini-batch Adam

    Initial weights come from ``stream.child(0)``; batch indices from
    ``stream.child(1)``, drawn ``batch_size`` at a time uniformly with replacement.
    Exactly ``config.iterations`` updates are applied; there is no early stopping,
    weight decay or learning-rate schedule.

    Raises
    ------

    DimensionMismatch
        The data do not have ``config.input_dim`` predictors
    NonFiniteLoss
        A mini-batch loss became NaN or infinite
    """
    validate_mlp_config(config)
    if data.n < 1:
        raise ValueError("Cannot train on an empty dataset.")
    if data.p != config.input_dim:
        raise DimensionMismatch(
            f"The data have {data.p} predictors but the network expects {config.input_dim}."
        )

    model = xavier_init(config, stream.child(0))
    state = AdamState(model)
    batches = sample_indices(stream.child(1), data.n, (config.iterations, config.batch_size))
    losses = np.empty(config.iterations)
    for iteration, rows in enumerate(batches, start=1):
        loss, gradients = mse_loss_and_gradients(model, data.x[rows], data.y[rows])
        if not np.isfinite(loss):
            raise NonFiniteLoss(iteration, loss)
        adam_step(model, state, gradients)
        losses[iteration - 1] = loss
        if iteration % 1000 == 0:
            logger.debug(f"iteration {iteration}: mini-batch loss {loss:.6f}")

    if not all(np.all(np.isfinite(w)) for w in model.weights):
        raise NonFiniteLoss(config.iterations, float("nan"))
    model.trained = True
    model.loss_history = losses
    model.adam_steps = state.step_count
    model.training_mse = float(np.mean((model.predict(data.x) - data.y) ** 2))
    if not np.isfinite(model.training_mse):
        raise NonFiniteLoss(config.iterations, model.training_mse)
    return model


class MlpTrainer(Trainer):
    """Trainer that fits an ``MlpRegressor`` with ``train``

    The ``input_dim`` of the configuration is replaced by the predictor count of the
    data handed to ``fit``, so one trainer serves any dataset.

    Attributes
    ----------

    config : MlpConfig
    """

    def __init__(self, config: MlpConfig = SIMULATION_MLP_CONFIG):
        """Constructor method"""
        self.config = config

    def fit(self, data: Dataset, stream: RngStream) -> MlpRegressor:
        return train(self.config._replace(input_dim=data.p), data, stream)

    def get_parameters(self) -> dict:
        params = self.config._asdict()
        params["hidden_layers"] = list(self.config.hidden_layers)
        params["trainer"] = self.__class__.__name__
        return params
