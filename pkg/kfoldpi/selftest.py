"""Fast oracle suites run by ``kfoldpi selftest``"""

import logging
import time
from typing import Callable, List, NamedTuple

import numpy as np

from kfoldpi.inference import conformal
from kfoldpi.inference.harness import parse_method, run_scenario
from kfoldpi.inference.mlp import MlpConfig, mse_loss_and_gradients, xavier_init
from kfoldpi.inference.regressors import OracleTrainer
from kfoldpi.inference.rng import derive_stream
from kfoldpi.inference.simulator import MeanFunction, ScenarioSpec, generate_dataset

logger = logging.getLogger(__name__)

SELFTEST_SEED = 20240101

SuiteResult = NamedTuple(
    "SuiteResult", [("name", str), ("passed", bool), ("detail", str), ("seconds", float)]
)
SuiteResult.__doc__ = "Outcome of one selftest suite."


def brute_force_quantile(residuals: np.ndarray, level: float) -> float:
    """Sort-and-index oracle of the conformal quantile

    Counts up to the smallest rank ``r`` with ``r >= level * (m + 1)``, clips it to ``m``
    and indexes the sorted magnitudes.
    """
    ordered = sorted(abs(float(value)) for value in residuals)
    target = level * (len(ordered) + 1) - conformal.RANK_TOLERANCE
    rank = 1
    while rank < target:
        rank += 1
    return ordered[min(rank, len(ordered)) - 1]


def quantile_oracle_suite(cases: int = 1000) -> str:
    """``conformal_quantile`` equals the brute-force oracle exactly on random cases"""
    stream = derive_stream(SELFTEST_SEED, [0])
    rng = stream.generator
    logging.getLogger(conformal.__name__).disabled = True
    try:
        for case in range(cases):
            m = int(rng.integers(1, 200))
            residuals = rng.standard_normal(m)
            if case % 4 == 0:
                residuals = np.round(residuals, 1)  # ties
            level = float(rng.choice([0.5, 0.8, 0.9, 0.95, rng.uniform(0.01, 0.99)]))
            expected = brute_force_quantile(residuals, level)
            actual = conformal.conformal_quantile(residuals, level)
            if actual != expected:
                raise AssertionError(
                    f"case {case}: m={m}, level={level}: got {actual!r}, oracle {expected!r}"
                )
    finally:
        logging.getLogger(conformal.__name__).disabled = False
    return f"{cases} cases agree"


def _numeric_gradient(model, x, y, array, index, h):
    original = array[index]
    array[index] = original + h
    loss_plus, _ = mse_loss_and_gradients(model, x, y)
    array[index] = original - h
    loss_minus, _ = mse_loss_and_gradients(model, x, y)
    array[index] = original
    return (loss_plus - loss_minus) / (2 * h)


def gradient_check_suite(networks: int = 50, h: float = 1e-5) -> str:
    """Analytic gradients agree with central finite differences on small networks"""
    stream = derive_stream(SELFTEST_SEED, [1])
    rng = stream.generator
    worst = 0.0
    checked = 0
    for network in range(networks):
        depth = int(rng.integers(1, 3))
        config = MlpConfig(
            input_dim=int(rng.integers(1, 5)),
            hidden_layers=tuple(int(w) for w in rng.integers(1, 6, size=depth)),
            activation="relu" if network % 2 == 0 else "tanh",
        )
        model = xavier_init(config, stream.child(network))
        for b in model.biases:
            b[:] = rng.normal(0, 0.1, size=b.shape)
        x = rng.standard_normal((int(rng.integers(1, 8)), config.input_dim))
        y = rng.standard_normal(x.shape[0])
        _, grads = mse_loss_and_gradients(model, x, y)
        pairs = list(zip(model.weights, grads.weights)) + list(zip(model.biases, grads.biases))
        for parameters, analytic in pairs:
            for index in np.ndindex(parameters.shape):
                numeric = _numeric_gradient(model, x, y, parameters, index, h)
                difference = abs(analytic[index] - numeric)
                if difference <= 1e-8:
                    checked += 1
                    continue
                error = difference / max(abs(analytic[index]), abs(numeric))
                if error >= 1e-4:
                    raise AssertionError(
                        f"network {network} ({config.activation}): analytic {analytic[index]!r} "
                        f"vs numeric {numeric!r} at {index}"
                    )
                worst = max(worst, error)
                checked += 1
    return f"{checked} gradient entries, worst relative error {worst:.2e}"


def oracle_coverage_suite(replicates: int = 50, tolerance: float = 0.02) -> str:
    """True-mean regressor: SC and k-fold conformal cover at 0.9 +/- tolerance

    Also checks that the k5 half-width at n=5000 approaches the 0.95 normal quantile.
    """
    trainer = OracleTrainer(MeanFunction("linear"))
    methods = [parse_method(label) for label in ("sc", "k2", "k5", "k10")]
    spec = ScenarioSpec("linear", "homoscedastic", 500, n_test=200, replicates=replicates)
    records = run_scenario(spec, methods, trainer, master_seed=SELFTEST_SEED)
    details = []
    for method in methods:
        coverage = np.mean([r.coverage for r in records if r.method == method.label])
        if abs(coverage - 0.9) > tolerance:
            raise AssertionError(
                f"{method.label} mean coverage {coverage:.4f} outside 0.9 +/- {tolerance}"
            )
        details.append(f"{method.label}={coverage:.4f}")

    large = ScenarioSpec("linear", "homoscedastic", 5000, n_test=10, replicates=1)
    stream = derive_stream(SELFTEST_SEED, [2])
    train, _ = generate_dataset(large, 0, stream)
    model = conformal.kfold_conformal(train, trainer, 5, 0.1, stream.child(9))
    if abs(model.half_width - 1.6449) > 0.05:
        raise AssertionError(f"k5 half-width {model.half_width:.4f} not within 1.6449 +/- 0.05")
    details.append(f"k5 half-width at n=5000 {model.half_width:.4f}")
    return ", ".join(details)


SUITES: List[Callable[[], str]] = [
    quantile_oracle_suite,
    gradient_check_suite,
    oracle_coverage_suite,
]


def run_selftest(suites: List[Callable[[], str]] = None) -> List[SuiteResult]:
    """Run each suite, capturing failures instead of raising"""
    results = []
    for suite in suites or SUITES:
        start = time.perf_counter()
        try:
            detail, passed = suite(), True
        except Exception as error:
            detail, passed = f"{error.__class__.__name__}: {error}", False
        results.append(SuiteResult(suite.__name__, passed, detail, time.perf_counter() - start))
        logger.info(f"{suite.__name__}: {'PASS' if passed else 'FAIL'} ({detail})")
    return results
