"""Run configuration for the command-line interface

Settings are resolved in three layers, later layers winning: the built-in defaults of
the sub-command (the study's recipe), a JSON configuration file given with ``--config``,
and command-line flags. ``--paper-defaults`` discards any network settings from the
configuration file so the study's recipe is used; explicit network flags still apply.

The configuration file holds one JSON object; every key is optional::

    {
        "seed": 42,
        "workers": 8,
        "out_dir": "results",
        "log_level": "INFO",
        "scenarios": ["linear:homoscedastic:500", "nonlinear:heavy_tailed:2500"],
        "methods": ["sc", "k2", "k5", "k10"],
        "replicates": 50,
        "n_test": 500,
        "p": 10,
        "rho": 0.6,
        "alpha": 0.1,
        "het_as_sd": false,
        "signed_quantiles": false,
        "kfold_center": "refit",
        "manifest": "datasets.json",
        "outer_folds": 5,
        "repeats": 20,
        "ratios": "auto",
        "record_timings": false,
        "nn": {
            "hidden_layers": [15, 15],
            "activation": "relu",
            "learning_rate": 0.0003,
            "batch_size": 32,
            "iterations": 20000
        }
    }

Unknown keys and invalid values raise ``ConfigError`` naming the field.
"""

import json
import logging
import os
from typing import List, NamedTuple, Optional, Tuple, Union

from kfoldpi.exceptions import ConfigError
from kfoldpi.inference.conformal import KFOLD_CENTERS
from kfoldpi.inference.harness import MethodSpec, parse_method
from kfoldpi.inference.mlp import (
    REAL_DATA_MLP_CONFIG,
    SIMULATION_MLP_CONFIG,
    MlpConfig,
    validate_mlp_config,
)
from kfoldpi.inference.rng import DEFAULT_SEED, MAX_SEED
from kfoldpi.inference.simulator import (
    ScenarioSpec,
    paper_scenario_grid,
    parse_scenario,
    scenario_name,
)

logger = logging.getLogger(__name__)

COMMANDS = ("simulate", "analyze")
NN_FIELDS = ("hidden_layers", "activation", "learning_rate", "batch_size", "iterations")
LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL")

RunConfig = NamedTuple(
    "RunConfig",
    [
        ("command", str),
        ("seed", int),
        ("workers", int),
        ("out_dir", str),
        ("log_level", str),
        ("scenarios", Tuple[ScenarioSpec, ...]),
        ("methods", Tuple[MethodSpec, ...]),
        ("alpha", float),
        ("signed_quantiles", bool),
        ("kfold_center", str),
        ("manifest", Optional[str]),
        ("outer_folds", int),
        ("repeats", int),
        ("ratios", Union[bool, str]),
        ("record_timings", bool),
        ("nn", MlpConfig),
    ],
)
RunConfig.__doc__ = "A fully resolved and validated run configuration."
RunConfig.scenarios.__doc__ = "Simulation scenarios (empty for analyze)."
RunConfig.ratios.__doc__ = "True, False or ``auto`` (width ratios iff SC is among the methods)."
RunConfig.nn.__doc__ = "Network recipe; input_dim is set from the data at fit time."


def _paper_nn(command: str) -> dict:
    recipe = REAL_DATA_MLP_CONFIG if command == "analyze" else SIMULATION_MLP_CONFIG
    return {
        "hidden_layers": list(recipe.hidden_layers),
        "activation": recipe.activation,
        "learning_rate": recipe.learning_rate,
        "batch_size": recipe.batch_size,
        "iterations": recipe.iterations,
    }


def default_settings(command: str) -> dict:
    """Built-in defaults of a sub-command, in configuration-file form"""
    if command not in COMMANDS:
        raise ValueError(f"Unknown command '{command}'; expected one of {COMMANDS}.")
    return {
        "seed": DEFAULT_SEED,
        "workers": os.cpu_count() or 1,
        "out_dir": "results",
        "log_level": "INFO",
        "scenarios": [
            scenario_name(spec).replace("-", ":") for spec in paper_scenario_grid()
        ],
        "methods": ["sc", "k2", "k5", "k10"] if command == "simulate" else ["sc", "k5"],
        "replicates": 50,
        "n_test": 500,
        "p": 10,
        "rho": 0.6,
        "alpha": 0.1,
        "het_as_sd": False,
        "signed_quantiles": False,
        "kfold_center": "refit",
        "manifest": None,
        "outer_folds": 5,
        "repeats": 20,
        "ratios": "auto",
        "record_timings": False,
        "nn": _paper_nn(command),
    }


def load_config_file(path: str) -> dict:
    """Read and shape-check a JSON configuration file"""
    try:
        with open(path, "r") as f:
            settings = json.load(f)
    except FileNotFoundError:
        raise ConfigError("config", f"the configuration file '{path}' does not exist.")
    except json.JSONDecodeError as error:
        raise ConfigError("config", f"'{path}' is not valid JSON ({error}).")
    if not isinstance(settings, dict):
        raise ConfigError("config", "the configuration file must hold a JSON object.")
    known = default_settings("simulate")
    for key, value in settings.items():
        if key not in known:
            raise ConfigError(key, f"unknown configuration key. Known keys: {sorted(known)}.")
        if key == "nn":
            if not isinstance(value, dict):
                raise ConfigError("nn", "must be a JSON object.")
            for nn_key in value:
                if nn_key not in NN_FIELDS:
                    raise ConfigError(f"nn.{nn_key}", f"unknown key. Known keys: {NN_FIELDS}.")
    return settings


def merge_settings(
    defaults: dict,
    file_settings: Optional[dict] = None,
    flag_settings: Optional[dict] = None,
    paper_defaults: bool = False,
) -> dict:
    """Layer defaults <- configuration file <- flags; None-valued flags are ignored

    The ``nn`` section merges key by key.
    """
    merged = {**defaults, "nn": dict(defaults["nn"])}
    for layer, is_file in ((file_settings or {}, True), (flag_settings or {}, False)):
        for key, value in layer.items():
            if value is None:
                continue
            if key == "nn":
                if is_file and paper_defaults:
                    logger.info("--paper-defaults: ignoring network settings of the config file")
                    continue
                merged["nn"].update({k: v for k, v in value.items() if v is not None})
            else:
                merged[key] = value
    return merged


def _require_int(settings: dict, key: str, minimum: int, maximum: int = None) -> int:
    value = settings[key]
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(key, f"must be an integer, got {value!r}.")
    if value < minimum or (maximum is not None and value > maximum):
        bound = f"at least {minimum}" if maximum is None else f"in [{minimum}, {maximum}]"
        raise ConfigError(key, f"must be {bound}, got {value}.")
    return value


def _require_float(settings: dict, key: str, low: float, high: float) -> float:
    value = settings[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(key, f"must be a number, got {value!r}.")
    if not low < value < high:
        raise ConfigError(key, f"must lie strictly between {low} and {high}, got {value}.")
    return float(value)


def _require_bool(settings: dict, key: str) -> bool:
    if not isinstance(settings[key], bool):
        raise ConfigError(key, f"must be true or false, got {settings[key]!r}.")
    return settings[key]


def _string_list(settings: dict, key: str) -> List[str]:
    value = settings[key]
    if isinstance(value, str):
        value = [item for item in value.split(",") if item.strip()]
    if not isinstance(value, list) or not value or not all(isinstance(v, str) for v in value):
        raise ConfigError(key, "must be a nonempty list of strings.")
    return [item.strip() for item in value]


def _nn_config(settings: dict) -> MlpConfig:
    nn = settings["nn"]
    try:
        config = MlpConfig(
            input_dim=1,
            hidden_layers=tuple(int(width) for width in nn["hidden_layers"]),
            activation=nn["activation"],
            learning_rate=float(nn["learning_rate"]),
            batch_size=int(nn["batch_size"]),
            iterations=int(nn["iterations"]),
        )
        validate_mlp_config(config)
    except (TypeError, ValueError) as error:
        raise ConfigError("nn", str(error))
    return config


def validate_settings(command: str, settings: dict) -> RunConfig:
    """Check merged settings and build the RunConfig

    Raises
    ------

    ConfigError
        A value is missing, of the wrong type or outside its domain
    """
    seed = _require_int(settings, "seed", 0, MAX_SEED)
    workers = _require_int(settings, "workers", 1)
    replicates = _require_int(settings, "replicates", 1)
    n_test = _require_int(settings, "n_test", 1)
    p = _require_int(settings, "p", 2)
    outer_folds = _require_int(settings, "outer_folds", 2)
    repeats = _require_int(settings, "repeats", 1)
    rho = _require_float(settings, "rho", -1.0, 1.0)
    alpha = _require_float(settings, "alpha", 0.0, 1.0)
    het_as_sd = _require_bool(settings, "het_as_sd")
    signed_quantiles = _require_bool(settings, "signed_quantiles")
    record_timings = _require_bool(settings, "record_timings")

    if settings["kfold_center"] not in KFOLD_CENTERS:
        raise ConfigError("kfold_center", f"must be one of {KFOLD_CENTERS}.")
    if settings["ratios"] not in (True, False, "auto"):
        raise ConfigError("ratios", "must be true, false or \"auto\".")
    log_level = str(settings["log_level"]).upper()
    if log_level not in LOG_LEVELS:
        raise ConfigError("log_level", f"must be one of {LOG_LEVELS}.")
    if not isinstance(settings["out_dir"], str) or not settings["out_dir"]:
        raise ConfigError("out_dir", "must be a nonempty path.")

    methods = []
    for text in _string_list(settings, "methods"):
        try:
            methods.append(parse_method(text))
        except ValueError as error:
            raise ConfigError("methods", str(error))
    labels = [method.label for method in methods]
    if len(set(labels)) != len(labels):
        raise ConfigError("methods", f"methods must be distinct, got {labels}.")

    scenarios = []
    if command == "simulate":
        for text in _string_list(settings, "scenarios"):
            try:
                scenarios.append(
                    parse_scenario(
                        text,
                        p=p,
                        rho=rho,
                        n_test=n_test,
                        replicates=replicates,
                        het_as_sd=het_as_sd,
                    )
                )
            except ValueError as error:
                raise ConfigError("scenarios", str(error))

    manifest = settings["manifest"]
    if command == "analyze" and not manifest:
        raise ConfigError("manifest", "analyze needs a dataset manifest (--manifest).")

    return RunConfig(
        command=command,
        seed=seed,
        workers=workers,
        out_dir=settings["out_dir"],
        log_level=log_level,
        scenarios=tuple(scenarios),
        methods=tuple(methods),
        alpha=alpha,
        signed_quantiles=signed_quantiles,
        kfold_center=settings["kfold_center"],
        manifest=manifest,
        outer_folds=outer_folds,
        repeats=repeats,
        ratios=settings["ratios"],
        record_timings=record_timings,
        nn=_nn_config(settings),
    )


def resolve_config(
    command: str,
    config_path: Optional[str] = None,
    flag_settings: Optional[dict] = None,
    paper_defaults: bool = False,
) -> RunConfig:
    """Resolve the three configuration layers into a validated RunConfig"""
    file_settings = load_config_file(config_path) if config_path else None
    settings = merge_settings(
        default_settings(command), file_settings, flag_settings, paper_defaults
    )
    return validate_settings(command, settings)


def config_to_dict(config: RunConfig) -> dict:
    """JSON-ready echo of a RunConfig for ``meta.json``"""
    echo = config._asdict()
    echo["scenarios"] = [spec._asdict() for spec in config.scenarios]
    echo["methods"] = [method.label for method in config.methods]
    echo["nn"] = {key: value for key, value in config.nn._asdict().items() if key != "input_dim"}
    echo["nn"]["hidden_layers"] = list(config.nn.hidden_layers)
    return echo
