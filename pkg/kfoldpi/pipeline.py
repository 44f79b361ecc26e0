"""Experiment pipeline: steps that produce, summarize and report evaluation records"""

import logging
import os
import time
import tracemalloc
from abc import ABCMeta, abstractmethod
from typing import List, Literal, Tuple, TypedDict, Union

import pyarrow as pa

from kfoldpi.data import RECORDS_SCHEMA, records_to_table, write_file, write_records

logger = logging.getLogger(__name__)

StepResult = Tuple[Union[pa.Table, None], Union[dict, None]]


class DataWriteConfig(TypedDict):
    data_format: str
    data_format_args: Union[dict, None]


class Step(metaclass=ABCMeta):
    """Blueprint for a unit of work in an experiment pipeline

    A step receives the records table built so far and the artifacts of the steps
    before it. Runner steps return a new records table; summarizing and reporting steps
    return ``None`` in that position and hand their results on as artifacts.
    """

    @abstractmethod
    def __init__(self):
        self._data_write_config: DataWriteConfig = {
            "data_format": "csv",
            "data_format_args": {},
        }

    @abstractmethod
    def run(self, data: pa.Table, artifacts: dict) -> StepResult:
        """Called by :meth:`Pipeline.run_pipeline`

        Parameters
        ----------

        data : PyArrow.Table
            Records produced by the preceding steps, possibly empty.
        artifacts : dict
            Artifacts of the preceding steps, keyed by artifact name.

        Returns
        -------
        Tuple[Union[pa.Table, None], Union[dict, None]]
            The full records table if the step produced records (it replaces the
            pipeline's table), and a dictionary of new artifacts if any. List-valued
            artifacts such as ``failures`` are appended to what earlier steps reported.
        """
        pass

    def set_write_config(self, data_config: DataWriteConfig) -> None:
        """Set the format used by :meth:`write_data`

        Parameters
        ----------

        data_config : DataWriteConfig
            ``data_format`` is ``csv``, ``parquet`` or ``json``; ``data_format_args``
            are passed on to the pyarrow writer for formats other than csv.
        """
        self._data_write_config = data_config

    def get_parameters(self) -> dict:
        """Configuration of the step for ``meta.json``; override to drop large items"""
        return vars(self).copy()

    def write_data(
        self,
        write_path: str,
        data: Union[pa.Table, None],
        data_filename: Union[str, None] = None,
    ) -> None:
        """Write a records table to ``write_path``

        CSV goes through ``write_records`` so the file is byte-deterministic; other
        formats through the data handlers' ``write_file``.

        Parameters
        ----------

        write_path : str
            Output directory.
        data : Union[pa.Table, None]
            Records table.
        data_filename : Union[str, None]
            File name without extension; defaults to ``<StepClass>Data``.
        """
        data_filename = data_filename or f"{self.__class__.__name__}Data"
        data_format = self._data_write_config["data_format"]
        file_path = os.path.join(write_path, f"{data_filename}.{data_format}")
        if data_format == "csv":
            write_records(data, file_path)
        else:
            write_file(
                data=data,
                path=file_path,
                format=data_format,
                **(self._data_write_config["data_format_args"] or {}),
            )
        logger.info(f"Wrote {file_path}")

    def write_artifacts(self, write_path: str, artifacts: Union[dict, None]) -> None:
        """Write the step's artifacts to ``write_path``; no-op unless overridden"""
        pass


def merge_artifacts(current: dict, new: dict) -> dict:
    """Merge a step's artifacts into the pipeline's

    Lists are concatenated so failures reported by several runners are all kept; any
    other value replaces the earlier one.
    """
    merged = dict(current)
    for name, value in new.items():
        if isinstance(value, list) and isinstance(merged.get(name), list):
            merged[name] = merged[name] + value
        else:
            merged[name] = value
    return merged


class Pipeline:
    """Runs simulation or real-data steps in order and writes the result bundle

    Attributes
    ----------

    write_path : str
        Output directory; must exist when anything is written.
    write_outputs : Literal["pipeline-outputs", "debug", False]
        *   'pipeline-outputs' writes the artifacts of every step and the final records.
        *   'debug' also writes the records after each step and tracks peak memory.
        *   False writes nothing.
    data_write_config : DataWriteConfig
        Format of the records files. CSV by default.
    data_filename : str
        File name (no extension) of the final records.
    processed_data : pa.Table
        Records after the most recent runner step.
    artifacts : dict
        Merged artifacts of all steps run so far.
    performance : dict
        Per-step wall time (and peak memory in debug mode) plus the pipeline total.
    """

    def __init__(
        self,
        write_path: str = None,
        write_outputs: Literal["pipeline-outputs", "debug", False] = "pipeline-outputs",
        data_write_config: DataWriteConfig = None,
        data_filename: str = "records",
    ):
        if write_outputs and (not write_path or not os.path.isdir(write_path)):
            raise ValueError(
                "Pipeline write_outputs was configured to write, however a write_path "
                "was not correctly specified. Please provide a path to an existing "
                "directory to write files into."
            )
        self.steps: List[Step] = []
        self.write_outputs = write_outputs
        self.write_path = write_path
        self.data_filename = data_filename
        self.data_write_config = data_write_config or {
            "data_format": "csv",
            "data_format_args": {},
        }

        self.processed_data: pa.Table = records_to_table([])
        self.artifacts = {}
        self.performance = {}

    @property
    def num_steps(self) -> int:
        return len(self.steps)

    def add_step(self, step: Step) -> None:
        """Append a step and give it the pipeline's write configuration

        Parameters
        ----------

        step : kfoldpi.pipeline.Step
        """
        if not isinstance(step, Step):
            raise TypeError("Only objects of type Step may be added to a kfoldpi pipeline.")
        step.set_write_config(data_config=self.data_write_config)
        self.steps.append(step)

    def _run_step(self, step: Step) -> StepResult:
        name = step.__class__.__name__
        track_memory = self.write_outputs == "debug"
        logger.info(f"Running {name}")
        if track_memory:
            tracemalloc.start()
        start = time.perf_counter()
        results = step.run(data=self.processed_data, artifacts=self.artifacts)
        elapsed = time.perf_counter() - start
        self.performance[name] = {"time": f"{elapsed:.3f}s"}
        if track_memory:
            peak_mb = tracemalloc.get_traced_memory()[1] / 1e6
            tracemalloc.stop()
            self.performance[name]["memory (MB)"] = f"{peak_mb:.1f}"
        logger.debug(f"{name} finished: {self.performance[name]}")

        if not isinstance(results, tuple):
            raise TypeError(
                f"{name} must return a tuple of (records table or None, artifacts dict "
                "or None); return None in a position the step does not produce."
            )
        return results

    def run_pipeline(self) -> None:
        """Run every step, write its artifacts, then write the final records"""
        last_runner = None
        start = time.perf_counter()
        for step in self.steps:
            records, artifacts = self._run_step(step)
            if isinstance(records, pa.Table):
                if not records.schema.equals(RECORDS_SCHEMA):
                    raise TypeError(
                        f"{step.__class__.__name__} returned a table that does not "
                        "follow the records schema."
                    )
                self.processed_data = records
                last_runner = step
                if self.write_outputs == "debug":
                    step.write_data(write_path=self.write_path, data=records)
            if isinstance(artifacts, dict):
                self.artifacts = merge_artifacts(self.artifacts, artifacts)
                if self.write_outputs:
                    step.write_artifacts(write_path=self.write_path, artifacts=self.artifacts)

        if self.write_outputs and last_runner is not None:
            last_runner.write_data(
                write_path=self.write_path,
                data=self.processed_data,
                data_filename=self.data_filename,
            )
        elapsed = time.perf_counter() - start
        self.performance[self.__class__.__name__] = f"{elapsed:.3f}s"
        logger.info(
            f"Pipeline finished in {elapsed:.1f}s with {self.processed_data.num_rows} records"
        )

    def get_parameters(self, condensed: bool = True) -> dict:
        """Step configurations and recorded performance

        Parameters
        ----------

        condensed : bool
            Leave out step attributes that are None or False.

        Returns
        -------

        dict
            ``{"steps": {StepClass: parameters}, "performance": {...}}``
        """
        steps = {}
        for step in self.steps:
            params = step.get_parameters()
            if condensed:
                params = {
                    key: value
                    for key, value in params.items()
                    if value is not None and value is not False
                }
            steps[step.__class__.__name__] = params
        return {"steps": steps, "performance": self.performance}
