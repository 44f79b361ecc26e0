"""Simulation and real-data evaluation protocols producing per-replicate coverage and width
records, and their aggregation"""

import logging
import re
import time
from typing import List, NamedTuple, Optional, Sequence, Tuple, Union

import numpy as np
import polars as pl
import pyarrow as pa
from joblib import Parallel, delayed

from kfoldpi.data import (
    Dataset,
    DatasetManifestEntry,
    EvalRecord,
    load_csv,
    records_to_table,
    table_to_records,
)
from kfoldpi.exceptions import (
    CellFailure,
    InsufficientData,
    KfoldpiError,
    MissingBaseline,
    NonFiniteLoss,
)
from kfoldpi.inference.conformal import (
    ConformalModel,
    IntervalOptions,
    kfold_conformal,
    kfold_partition,
    predict_intervals,
    split_conformal,
)
from kfoldpi.inference.mlp import MlpConfig, MlpTrainer
from kfoldpi.inference.regressors import Trainer
from kfoldpi.inference.rng import DEFAULT_SEED, RngStream, derive_stream, name_key
from kfoldpi.inference.simulator import ScenarioSpec, generate_dataset, scenario_name
from kfoldpi.inference.utils.polars_utils import (
    pair_with_baseline,
    unpaired_records,
    validate_unique_keys,
)
from kfoldpi.inference.utils.validations import (
    validate_alpha,
    validate_columns,
    validate_positive_int,
    validate_pyarrow_table,
)
from kfoldpi.pipeline import Step

logger = logging.getLogger(__name__)

BASELINE = "SC"
SIMULATION_DOMAIN = 0
REAL_DATA_DOMAIN = 1
# Second path element under a replicate: 0 and 1 are its training and test data
FIT_KEY = 2
RETRY_KEY = 1 << 20
# coverage quartiles use linear interpolation between closest ranks
QUARTILE_LEVELS = (0.25, 0.5, 0.75)

MethodSpec = NamedTuple("MethodSpec", [("label", str), ("kind", str), ("k", int)])
MethodSpec.__doc__ = "An interval construction method: split conformal or k-fold conformal."
MethodSpec.label.__doc__ = "Label used in records, ``SC`` or ``k<k>``."
MethodSpec.kind.__doc__ = "``split`` or ``kfold``."
MethodSpec.k.__doc__ = "Number of folds (2 for split conformal, the two halves)."

AggregateSummary = NamedTuple(
    "AggregateSummary",
    [
        ("scenario", str),
        ("method", str),
        ("replicates", int),
        ("mean_coverage", float),
        ("coverage_quartiles", Tuple[float, float, float]),
        ("mean_width", float),
        ("log2_width_ratio", Optional[float]),
    ],
)
AggregateSummary.__doc__ = "Per-(scenario, method) summary of EvalRecords."
AggregateSummary.coverage_quartiles.__doc__ = "First quartile, median, third quartile."
AggregateSummary.log2_width_ratio.__doc__ = """Mean over replicates of
    ``log2(width_SC / width_method)``, paired on (scenario, replicate); None when ratios
    were not requested or no pair exists.
    """

_METHOD_PATTERN = re.compile(r"k(\d+)|kfold\((\d+)\)")


def parse_method(text: str) -> MethodSpec:
    """Parse ``sc``, ``k<k>`` or ``kfold(<k>)`` (case-insensitive)"""
    token = text.strip().lower()
    if token == "sc":
        return MethodSpec(BASELINE, "split", 2)
    match = _METHOD_PATTERN.fullmatch(token)
    if not match:
        raise ValueError(f"Unknown method '{text}'. Expected sc, k<k> or kfold(<k>).")
    k = int(match.group(1) or match.group(2))
    if k < 2:
        raise ValueError(f"k-fold conformal needs at least 2 folds, got '{text}'.")
    return MethodSpec(f"k{k}", "kfold", k)


def method_sort_key(label: str) -> Tuple[int, int, str]:
    """SC first, then k-fold methods by increasing k"""
    if label == BASELINE:
        return (0, 0, label)
    match = _METHOD_PATTERN.fullmatch(label.lower())
    return (1, int(match.group(1) or match.group(2)), label) if match else (2, 0, label)


def _validate_methods(methods: Sequence[MethodSpec]) -> None:
    if not methods:
        raise ValueError("At least one method is required.")
    labels = [method.label for method in methods]
    if len(set(labels)) != len(labels):
        raise ValueError(f"Methods must be distinct, got {labels}.")


def _as_trainer(nn_config: Union[MlpConfig, Trainer]) -> Trainer:
    if isinstance(nn_config, Trainer):
        return nn_config
    if isinstance(nn_config, MlpConfig):
        return MlpTrainer(nn_config)
    raise TypeError("nn_config must be an MlpConfig or a Trainer.")


def fit_method(
    method: MethodSpec,
    data: Dataset,
    trainer: Trainer,
    alpha: float,
    stream: RngStream,
    options: IntervalOptions = IntervalOptions(),
) -> ConformalModel:
    if method.kind == "split":
        return split_conformal(data, trainer, alpha, stream, options)
    return kfold_conformal(data, trainer, method.k, alpha, stream, options)


def evaluate_intervals(model: ConformalModel, test: Dataset) -> Tuple[float, float]:
    """Coverage rate and mean width of a fitted model's intervals on a test set

    A response on an interval bound counts as covered.
    """
    centers, lower, upper = predict_intervals(model, test.x)
    covered = np.count_nonzero((test.y >= lower) & (test.y <= upper))
    return covered / test.n, float(np.mean(upper - lower))


def _fit_and_evaluate(
    method: MethodSpec,
    train: Dataset,
    test: Dataset,
    trainer: Trainer,
    alpha: float,
    stream: RngStream,
    options: IntervalOptions,
    tag: Tuple[str, int],
) -> Tuple[float, float, float]:
    start = time.perf_counter()
    try:
        model = fit_method(method, train, trainer, alpha, stream, options)
    except NonFiniteLoss as error:
        logger.warning(
            f"{method.label} on {tag[0]} replicate {tag[1]} diverged ({error}); retrying once "
            "with a fresh stream."
        )
        try:
            model = fit_method(method, train, trainer, alpha, stream.child(RETRY_KEY), options)
        except Exception as retry_error:
            raise CellFailure(tag[0], tag[1], method.label, retry_error) from retry_error
    except Exception as error:
        raise CellFailure(tag[0], tag[1], method.label, error) from error
    coverage, mean_width = evaluate_intervals(model, test)
    return coverage, mean_width, time.perf_counter() - start


# ======= Simulation ========


def scenario_stream(spec: ScenarioSpec, master_seed: int) -> RngStream:
    """Stream of one scenario; its data and fits are derived from it by replicate"""
    return derive_stream(master_seed, [SIMULATION_DOMAIN, name_key(scenario_name(spec))])


def _simulate_replicate(
    spec: ScenarioSpec,
    replicate: int,
    methods: Sequence[MethodSpec],
    trainer: Trainer,
    alpha: float,
    options: IntervalOptions,
    master_seed: int,
) -> Tuple[List[EvalRecord], List[CellFailure]]:
    name = scenario_name(spec)
    stream = scenario_stream(spec, master_seed)
    try:
        train, test = generate_dataset(spec, replicate, stream)
    except KfoldpiError as error:
        return [], [CellFailure(name, replicate, method.label, error) for method in methods]

    records, failures = [], []
    for method in methods:
        fit_stream = stream.child(replicate, FIT_KEY, name_key(method.label))
        try:
            coverage, width, runtime = _fit_and_evaluate(
                method, train, test, trainer, alpha, fit_stream, options, (name, replicate)
            )
        except CellFailure as failure:
            failures.append(failure)
            continue
        records.append(EvalRecord(method.label, name, replicate, coverage, width, runtime))
    return records, failures


def _collect(
    results: List[Tuple[List[EvalRecord], List[CellFailure]]],
    failures: Optional[List[CellFailure]],
) -> List[EvalRecord]:
    records = [record for unit_records, _ in results for record in unit_records]
    unit_failures = [failure for _, unit_failures in results for failure in unit_failures]
    if unit_failures:
        if failures is None:
            raise unit_failures[0]
        failures.extend(unit_failures)
    return records


def run_simulation(
    specs: Sequence[ScenarioSpec],
    methods: Sequence[MethodSpec],
    nn_config: Union[MlpConfig, Trainer],
    master_seed: int = DEFAULT_SEED,
    alpha: float = 0.1,
    options: IntervalOptions = IntervalOptions(),
    workers: int = 1,
    failures: Optional[List[CellFailure]] = None,
) -> List[EvalRecord]:
    """Evaluate every method on every replicate of every scenario

    (scenario, replicate) units run in a joblib process pool. Every unit draws from
    streams keyed by scenario name, replicate and method label, so the records do not
    depend on ``workers``.

    Parameters
    ----------

    specs : Sequence[ScenarioSpec]
    methods : Sequence[MethodSpec]
    nn_config : Union[MlpConfig, Trainer]
        Network recipe, or any picklable trainer (e.g. an ``OracleTrainer``).
    master_seed : int
    alpha : float
        Miscoverage level; intervals target ``1 - alpha`` coverage.
    options : IntervalOptions
    workers : int
        Number of worker processes; 1 runs in-process.
    failures : Optional[List[CellFailure]]
        If given, failed cells are appended here and their records omitted; otherwise the
        first failure is raised.

    Returns
    -------

    List[EvalRecord]
        Records in canonical order (scenario, method, replicate).
    """
    _validate_methods(methods)
    validate_alpha(alpha)
    validate_positive_int(workers, "workers")
    trainer = _as_trainer(nn_config)
    units = [(spec, replicate) for spec in specs for replicate in range(spec.replicates)]
    logger.info(
        f"Simulating {len(units)} (scenario, replicate) units for methods "
        f"{[method.label for method in methods]} with {workers} worker(s)"
    )
    results = Parallel(n_jobs=workers, prefer="processes")(
        delayed(_simulate_replicate)(spec, replicate, methods, trainer, alpha, options, master_seed)
        for spec, replicate in units
    )
    records = _collect(results, failures)
    for spec in specs:
        count = sum(1 for record in records if record.scenario == scenario_name(spec))
        logger.info(f"Scenario {scenario_name(spec)}: {count} records")
    return sorted(records, key=lambda r: (r.scenario, r.method, r.replicate))


def run_scenario(
    spec: ScenarioSpec,
    methods: Sequence[MethodSpec],
    nn_config: Union[MlpConfig, Trainer],
    master_seed: int = DEFAULT_SEED,
    alpha: float = 0.1,
    options: IntervalOptions = IntervalOptions(),
    workers: int = 1,
    failures: Optional[List[CellFailure]] = None,
) -> List[EvalRecord]:
    """Evaluate every method on every replicate of one scenario

    For each replicate one training and one test set are simulated; every method is fit
    on the same training set and evaluated on the same test set, which pairs the records
    for width ratios. Returns ``replicates * len(methods)`` records unless cells fail.
    """
    return run_simulation(
        [spec], methods, nn_config, master_seed, alpha, options, workers, failures
    )


# ======= Real data ========


def outer_partition(n: int, outer_folds: int, stream: RngStream) -> List[np.ndarray]:
    """Outer cross-validation folds of one repeat, checked to partition ``range(n)``"""
    folds = kfold_partition(n, outer_folds, stream)
    assigned = np.sort(np.concatenate(folds))
    if assigned.shape[0] != n or not np.array_equal(assigned, np.arange(n)):
        raise RuntimeError("Outer folds do not place every observation in exactly one fold.")
    return folds


def standardize(train_x: np.ndarray, test_x: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """z-score both matrices with the training columns' mean and standard deviation

    Constant training columns are centred only.
    """
    center = train_x.mean(axis=0)
    scale = train_x.std(axis=0, ddof=1)
    scale[scale == 0] = 1.0
    return (train_x - center) / scale, (test_x - center) / scale


def _real_data_fold(
    data: Dataset,
    train_index: np.ndarray,
    test_index: np.ndarray,
    repeat: int,
    fold: int,
    methods: Sequence[MethodSpec],
    trainer: Trainer,
    alpha: float,
    options: IntervalOptions,
    master_seed: int,
) -> Tuple[List[Tuple[str, float, float, int, float]], List[CellFailure]]:
    train, test = data.subset(train_index), data.subset(test_index)
    train_x, test_x = standardize(train.x, test.x)
    train, test = train.with_predictors(train_x), test.with_predictors(test_x)

    tallies, failures = [], []
    for method in methods:
        stream = derive_stream(
            master_seed,
            [REAL_DATA_DOMAIN, name_key(data.name), repeat, 1 + fold, name_key(method.label)],
        )
        try:
            coverage, width, runtime = _fit_and_evaluate(
                method, train, test, trainer, alpha, stream, options, (data.name, repeat)
            )
        except CellFailure as failure:
            failures.append(failure)
            continue
        tallies.append((method.label, coverage, width, test.n, runtime))
    return tallies, failures


def run_real_dataset(
    data: Dataset,
    methods: Sequence[MethodSpec],
    nn_config: Union[MlpConfig, Trainer],
    outer_folds: int = 5,
    repeats: int = 20,
    master_seed: int = DEFAULT_SEED,
    alpha: float = 0.1,
    options: IntervalOptions = IntervalOptions(),
    workers: int = 1,
    failures: Optional[List[CellFailure]] = None,
) -> List[EvalRecord]:
    """Repeated outer k-fold cross validation of the interval methods on one dataset

    In every repeat the observations are split into ``outer_folds`` folds. Each fold in
    turn is the test set while the remaining folds feed the conformal method; predictors
    are standardized with the outer-training statistics only. The record of a
    (method, repeat) pools coverage and width over the repeat's test folds, so every
    observation is tested exactly once per repeat.

    Returns
    -------

    List[EvalRecord]
        ``repeats * len(methods)`` records; ``scenario`` is the dataset name and
        ``replicate`` the repeat index. A (method, repeat) with a failed fold has no record.

    Raises
    ------

    InsufficientData
        ``data.n < 2 * outer_folds``
    """
    _validate_methods(methods)
    validate_alpha(alpha)
    validate_positive_int(repeats, "repeats")
    validate_positive_int(workers, "workers")
    if outer_folds < 2:
        raise ValueError("outer_folds must be at least 2.")
    if data.n < 2 * outer_folds:
        raise InsufficientData(
            f"Dataset '{data.name}' has {data.n} observations; {outer_folds}-fold cross "
            f"validation needs at least {2 * outer_folds}."
        )
    trainer = _as_trainer(nn_config)

    units = []
    for repeat in range(repeats):
        partition_stream = derive_stream(
            master_seed, [REAL_DATA_DOMAIN, name_key(data.name), repeat]
        )
        folds = outer_partition(data.n, outer_folds, partition_stream)
        for fold, test_index in enumerate(folds):
            train_index = np.concatenate([f for j, f in enumerate(folds) if j != fold])
            units.append((repeat, fold, np.sort(train_index), test_index))
    logger.info(
        f"Dataset {data.name} (n={data.n}, p={data.p}): {repeats} repeat(s) of "
        f"{outer_folds}-fold cross validation with {workers} worker(s)"
    )
    results = Parallel(n_jobs=workers, prefer="processes")(
        delayed(_real_data_fold)(
            data, train_index, test_index, repeat, fold, methods, trainer, alpha, options,
            master_seed,
        )
        for repeat, fold, train_index, test_index in units
    )

    unit_failures = [failure for _, fold_failures in results for failure in fold_failures]
    if unit_failures and failures is None:
        raise unit_failures[0]
    failed = {(failure.method, failure.replicate) for failure in unit_failures}
    if failures is not None:
        failures.extend(unit_failures)

    records = []
    for method in methods:
        for repeat in range(repeats):
            if (method.label, repeat) in failed:
                continue
            tallies = [
                tally
                for (unit_repeat, _, _, _), (fold_tallies, _) in zip(units, results)
                if unit_repeat == repeat
                for tally in fold_tallies
                if tally[0] == method.label
            ]
            tested = sum(tally[3] for tally in tallies)
            coverage = sum(tally[1] * tally[3] for tally in tallies) / tested
            width = sum(tally[2] * tally[3] for tally in tallies) / tested
            runtime = sum(tally[4] for tally in tallies)
            records.append(EvalRecord(method.label, data.name, repeat, coverage, width, runtime))
    return sorted(records, key=lambda r: (r.scenario, r.method, r.replicate))


# ======= Aggregation ========


def _records_frame(records: Sequence[EvalRecord]) -> pl.DataFrame:
    df = pl.from_arrow(records_to_table(records))
    validate_unique_keys(df)
    return df


def paired_width_ratios(records: Sequence[EvalRecord], baseline: str = BASELINE) -> pl.DataFrame:
    """Per-replicate ``log2(width_baseline / width_method)`` for every paired record

    Raises
    ------

    MissingBaseline
        No record of the baseline method exists
    """
    df = _records_frame(records)
    if df.filter(pl.col("method") == baseline).height == 0:
        raise MissingBaseline(
            f"Width ratios need {baseline} records as the baseline, but none were found."
        )
    unpaired = unpaired_records(df, baseline)
    if unpaired.height:
        logger.warning(
            f"{unpaired.height} record(s) have no {baseline} partner on the same "
            "(scenario, replicate) and are left out of the width ratios."
        )
    return pair_with_baseline(df, baseline).select(
        "scenario", "method", "replicate", "log2_ratio"
    )


def aggregate(
    records: Sequence[EvalRecord],
    ratios: Union[bool, str] = "auto",
    baseline: str = BASELINE,
) -> List[AggregateSummary]:
    """Summarize records per (scenario, method)

    Parameters
    ----------

    records : Sequence[EvalRecord]
    ratios : Union[bool, str]
        Compute paired log2 width ratios against ``baseline``: True, False, or ``auto``
        (only when baseline records exist).
    baseline : str

    Returns
    -------

    List[AggregateSummary]
        Ordered by scenario, then SC before k-fold methods by increasing k.

    Raises
    ------

    MissingBaseline
        ``ratios`` is True and there are no baseline records
    """
    if not records:
        raise ValueError("aggregate needs at least one record.")
    df = _records_frame(records)
    has_baseline = df.filter(pl.col("method") == baseline).height > 0
    if ratios is True and not has_baseline:
        raise MissingBaseline(
            f"Width ratios were requested but there are no {baseline} records to compare "
            "against. Add sc to the methods or disable ratios."
        )
    want_ratios = has_baseline if ratios == "auto" else bool(ratios)
    mean_ratios = {}
    if want_ratios:
        paired = paired_width_ratios(records, baseline)
        for row in (
            paired.group_by("scenario", "method")
            .agg(pl.col("log2_ratio").mean())
            .iter_rows(named=True)
        ):
            mean_ratios[(row["scenario"], row["method"])] = row["log2_ratio"]

    summaries = []
    for (scenario, method), group in df.group_by(["scenario", "method"]):
        coverage = group["coverage"].to_numpy()
        summaries.append(
            AggregateSummary(
                scenario=scenario,
                method=method,
                replicates=group.height,
                mean_coverage=float(np.mean(coverage)),
                coverage_quartiles=tuple(
                    float(q) for q in np.quantile(coverage, QUARTILE_LEVELS, method="linear")
                ),
                mean_width=float(group["mean_width"].mean()),
                log2_width_ratio=mean_ratios.get((scenario, method)),
            )
        )
    return sorted(summaries, key=lambda s: (s.scenario, method_sort_key(s.method)))


# ======= Pipeline steps ========


def _finalize_records(
    data: Optional[pa.Table], records: List[EvalRecord], record_timings: bool
) -> pa.Table:
    if not record_timings:
        records = [record._replace(runtime_seconds=0.0) for record in records]
    if data is not None:
        validate_pyarrow_table(data)
        records = table_to_records(data) + records
    return records_to_table(records)


class SimulationRunner(Step):
    """Pipeline step running the simulation study

    Attributes
    ----------

    scenarios : List[ScenarioSpec]
    methods : List[MethodSpec]
    trainer : Trainer
    master_seed : int
    alpha : float
    options : IntervalOptions
    workers : int
    record_timings : bool
        Keep the measured runtimes; otherwise they are written as 0.0 so the records are
        byte-identical across runs.
    """

    def __init__(
        self,
        scenarios: List[ScenarioSpec],
        methods: List[MethodSpec],
        trainer: Union[MlpConfig, Trainer],
        master_seed: int = DEFAULT_SEED,
        alpha: float = 0.1,
        options: IntervalOptions = IntervalOptions(),
        workers: int = 1,
        record_timings: bool = False,
    ):
        """Constructor method"""
        super().__init__()
        self.scenarios = list(scenarios)
        self.methods = list(methods)
        self.trainer = _as_trainer(trainer)
        self.master_seed = master_seed
        self.alpha = alpha
        self.options = options
        self.workers = workers
        self.record_timings = record_timings

    def run(self, data: pa.Table, artifacts: dict) -> Tuple[pa.Table, dict]:
        failures: List[CellFailure] = []
        records = run_simulation(
            self.scenarios,
            self.methods,
            self.trainer,
            self.master_seed,
            self.alpha,
            self.options,
            self.workers,
            failures,
        )
        for failure in failures:
            logger.error(str(failure))
        return _finalize_records(data, records, self.record_timings), {
            "failures": failures,
            "methods": [method.label for method in self.methods],
            "scenarios": [scenario_name(spec) for spec in self.scenarios],
        }

    def get_parameters(self) -> dict:
        return {
            "scenarios": [spec._asdict() for spec in self.scenarios],
            "methods": [method.label for method in self.methods],
            "trainer": self.trainer.get_parameters(),
            "master_seed": self.master_seed,
            "alpha": self.alpha,
            "options": self.options._asdict(),
            "workers": self.workers,
            "record_timings": self.record_timings,
        }


class RealDataRunner(Step):
    """Pipeline step running repeated outer cross validation on manifest datasets

    A dataset that fails to load, or is too small for the outer folds, is skipped with
    an error and listed under the ``dataset_failures`` artifact; the others proceed.
    """

    def __init__(
        self,
        entries: List[DatasetManifestEntry],
        methods: List[MethodSpec],
        trainer: Union[MlpConfig, Trainer],
        master_seed: int = DEFAULT_SEED,
        outer_folds: int = 5,
        repeats: int = 20,
        alpha: float = 0.1,
        options: IntervalOptions = IntervalOptions(),
        workers: int = 1,
        record_timings: bool = False,
    ):
        """Constructor method"""
        super().__init__()
        self.entries = list(entries)
        self.methods = list(methods)
        self.trainer = _as_trainer(trainer)
        self.master_seed = master_seed
        self.outer_folds = outer_folds
        self.repeats = repeats
        self.alpha = alpha
        self.options = options
        self.workers = workers
        self.record_timings = record_timings

    def run(self, data: pa.Table, artifacts: dict) -> Tuple[pa.Table, dict]:
        failures: List[CellFailure] = []
        dataset_failures = []
        records = []
        for entry in self.entries:
            try:
                dataset = load_csv(entry)
                records.extend(
                    run_real_dataset(
                        dataset,
                        self.methods,
                        self.trainer,
                        self.outer_folds,
                        self.repeats,
                        self.master_seed,
                        self.alpha,
                        self.options,
                        self.workers,
                        failures,
                    )
                )
            except (OSError, KfoldpiError) as error:
                logger.error(f"Skipping dataset '{entry.name}': {error}")
                dataset_failures.append({"dataset": entry.name, "error": str(error)})
        for failure in failures:
            logger.error(str(failure))
        return _finalize_records(data, records, self.record_timings), {
            "failures": failures,
            "dataset_failures": dataset_failures,
            "methods": [method.label for method in self.methods],
            "datasets": [entry.name for entry in self.entries],
        }

    def get_parameters(self) -> dict:
        return {
            "datasets": [entry._asdict() for entry in self.entries],
            "methods": [method.label for method in self.methods],
            "trainer": self.trainer.get_parameters(),
            "master_seed": self.master_seed,
            "outer_folds": self.outer_folds,
            "repeats": self.repeats,
            "alpha": self.alpha,
            "options": self.options._asdict(),
            "workers": self.workers,
            "record_timings": self.record_timings,
        }


class Aggregator(Step):
    """Pipeline step summarizing the records table

    Adds the ``summaries`` artifact and, when ratios are computed, the per-replicate
    ``paired_ratios`` frame used for the width-ratio boxplots.
    """

    def __init__(self, ratios: Union[bool, str] = "auto", baseline: str = BASELINE):
        """Constructor method"""
        super().__init__()
        self.ratios = ratios
        self.baseline = baseline

    def run(self, data: pa.Table, artifacts: dict) -> Tuple[None, dict]:
        validate_pyarrow_table(data)
        validate_columns(list(EvalRecord._fields), data)
        records = table_to_records(data)
        if not records:
            logger.warning("No records to aggregate.")
            return None, {"summaries": [], "paired_ratios": None}
        summaries = aggregate(records, self.ratios, self.baseline)
        paired = None
        if any(summary.log2_width_ratio is not None for summary in summaries):
            paired = paired_width_ratios(records, self.baseline)
        return None, {"summaries": summaries, "paired_ratios": paired}
