"""Dataset class definition, loaders for real regression data and writers for result artifacts"""

from __future__ import annotations

import json
import logging
import os
from datetime import datetime
from typing import List, NamedTuple, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
import polars as pl
import pyarrow as pa
import pyarrow.csv as csv
import pyarrow.parquet as pq

from kfoldpi.data.utils.pyarrow_utils import (
    format_float_column,
    namedtuples_to_table,
    table_to_namedtuples,
)
from kfoldpi.exceptions import (
    DimensionMismatch,
    EmptyAfterCleaning,
    InsufficientData,
    ParseError,
)

logger = logging.getLogger(__name__)

RECORDS_SCHEMA_VERSION = 1

# Shapes (predictors, observations) of the ten real datasets of the evaluation
PAPER_DATASETS = {
    "Power Plant": (4, 9568),
    "Facebook Metrics": (18, 500),
    "Parkinsons Telemonitoring": (21, 5875),
    "Bodyfat": (13, 252),
    "Residential Building": (106, 372),
    "Real Estate Valuation": (5, 414),
    "Wine Quality": (11, 4898),
    "Aquatic Toxicity": (8, 546),
    "Fish Toxicity": (6, 908),
    "Energy Efficiency": (8, 768),
}


class Dataset:
    """A regression dataset: a matrix of predictors and a response vector

    Row ``i`` of ``x`` pairs with ``y[i]``. Construction validates that there are at
    least two rows, that shapes agree and that every value is finite.

    Attributes
    ----------

    x : numpy.ndarray
        ``(n, p)`` float64 predictors.
    y : numpy.ndarray
        ``n`` float64 responses.
    name : str
        Identifier used in records and figures.
    feature_names : List[str]
        Predictor column names, in order.
    response_name : str
        Response column name.
    origin_file_path : str
        If a file was the data source, its path, for provenance.
    origin_format : str
        The format of the data source.
    origin_row_count : int
        Row count of the source before cleaning.
    dropped_row_count : int
        Rows removed while cleaning.
    """

    def __init__(
        self,
        x,
        y,
        name: str = "dataset",
        feature_names: Optional[Sequence[str]] = None,
        response_name: str = "y",
    ):
        """Constructor method"""
        x = np.array(x, dtype=np.float64)
        y = np.array(y, dtype=np.float64)
        if x.ndim == 1:
            x = x[:, None]
        if x.ndim != 2 or y.ndim != 1 or x.shape[0] != y.shape[0]:
            raise DimensionMismatch(
                f"Predictors of shape {x.shape} do not pair with a response of shape {y.shape}."
            )
        if x.shape[0] < 2:
            raise InsufficientData("A dataset needs at least two observations.")
        if x.shape[1] < 1:
            raise DimensionMismatch("A dataset needs at least one predictor.")
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
            raise ValueError("Dataset values must all be finite.")

        self.date = str(datetime.now())
        self.x = x
        self.y = y
        self.name = name
        if feature_names is None:
            feature_names = [f"x{j + 1}" for j in range(x.shape[1])]
        self.feature_names = list(feature_names)
        self.response_name = response_name
        self.origin_file_path = None
        self.origin_format = "numpy"
        self.origin_row_count = x.shape[0]
        self.dropped_row_count = 0

    @property
    def n(self) -> int:
        return self.x.shape[0]

    @property
    def p(self) -> int:
        return self.x.shape[1]

    def subset(self, indices) -> Dataset:
        """Rows ``indices`` as a new Dataset (in the given order)"""
        indices = np.asarray(indices, dtype=np.int64)
        subset = Dataset(
            self.x[indices],
            self.y[indices],
            name=self.name,
            feature_names=self.feature_names,
            response_name=self.response_name,
        )
        subset.origin_format = "subset"
        return subset

    def with_predictors(self, x) -> Dataset:
        """Same responses and names, replaced predictor matrix"""
        replaced = Dataset(
            x, self.y, self.name, feature_names=self.feature_names, response_name=self.response_name
        )
        replaced.origin_format = self.origin_format
        return replaced

    def get_parameters(self) -> dict:
        params = vars(self).copy()
        params["x"] = list(self.x.shape)
        params["y"] = list(self.y.shape)
        return params


DatasetManifestEntry = NamedTuple(
    "DatasetManifestEntry",
    [
        ("name", str),
        ("path", str),
        ("response_column", Union[str, int]),
        ("drop_columns", Tuple[Union[str, int], ...]),
        ("delimiter", str),
        ("has_header", bool),
        ("catalog_name", Optional[str]),
    ],
)
DatasetManifestEntry.__new__.__defaults__ = ((), ",", True, None)
DatasetManifestEntry.__doc__ = "Describe how one real dataset is read from a delimited file."
DatasetManifestEntry.name.__doc__ = "Identifier of the dataset in records and figures."
DatasetManifestEntry.path.__doc__ = """Path to the file. Relative paths in a manifest file
    are resolved against the manifest's directory.
    """
DatasetManifestEntry.response_column.__doc__ = """Name of the response column, or its
    zero-based index in the file's original column order.
    """
DatasetManifestEntry.drop_columns.__doc__ = """Columns (names or zero-based indices) removed
    before the predictors are formed, e.g. identifiers or alternative targets.
    """
DatasetManifestEntry.delimiter.__doc__ = "Single field separator character."
DatasetManifestEntry.has_header.__doc__ = """Whether the first line holds column names. Without
    a header, columns are named ``column_1``, ``column_2``, ...
    """
DatasetManifestEntry.catalog_name.__doc__ = """Optional key of ``PAPER_DATASETS``; the loaded
    shape is checked against the catalogued one and a warning is logged on mismatch.
    """


# ======= Loaders ========


def from_numpy(x, y, name: str = "dataset") -> Dataset:
    """Create a kfoldpi Dataset from predictor and response arrays"""
    return Dataset(x, y, name=name)


def from_pandas(
    df: pd.DataFrame,
    response_column: str,
    drop_columns: Sequence[str] = (),
    name: str = "dataset",
) -> Dataset:
    """Create a kfoldpi Dataset from a Pandas DataFrame

    Parameters
    ----------

    df : pandas.DataFrame
        Numeric data; every column other than the response and ``drop_columns`` becomes
        a predictor, in column order.
    response_column : str
        Name of the response column.
    drop_columns : Sequence[str]
        Columns to ignore.
    name : str
        Dataset identifier.

    Returns
    -------

    kfoldpi.data.data_handlers.Dataset
    """
    if response_column not in df.columns:
        raise ParseError("The response column was not found.", column=str(response_column))
    features = [c for c in df.columns if c != response_column and c not in set(drop_columns)]
    dataset = Dataset(
        df[features].to_numpy(dtype=np.float64),
        df[response_column].to_numpy(dtype=np.float64),
        name=name,
        feature_names=[str(c) for c in features],
        response_name=str(response_column),
    )
    dataset.origin_format = "pandas"
    return dataset


def load_csv(entry: DatasetManifestEntry) -> Dataset:
    """Load a delimited numeric file into a Dataset

    Every cell is parsed as a 64-bit float. Rows with any missing, non-parseable or
    non-finite cell are dropped (no imputation) and the number dropped is logged and
    recorded in ``dropped_row_count``. Column order is preserved.

    Parameters
    ----------

    entry : DatasetManifestEntry
        Location and layout of the file.

    Returns
    -------

    kfoldpi.data.data_handlers.Dataset

    Raises
    ------

    FileNotFoundError
        The file does not exist
    ParseError
        The file is ragged, a named column is missing, or a column holds no numeric value
    EmptyAfterCleaning
        Every row was dropped
    """
    if not os.path.isfile(entry.path):
        raise FileNotFoundError(f"Dataset '{entry.name}' was not found at {entry.path}.")

    try:
        raw = pl.read_csv(
            entry.path,
            separator=entry.delimiter,
            has_header=entry.has_header,
            infer_schema_length=0,
        )
    except pl.exceptions.PolarsError as error:
        raise ParseError(f"Dataset '{entry.name}' could not be parsed: {error}") from error

    columns = raw.columns
    response = _resolve_column(entry.response_column, columns, entry.name)
    dropped = {_resolve_column(c, columns, entry.name) for c in entry.drop_columns}
    if response in dropped:
        raise ParseError(
            f"Dataset '{entry.name}' drops its own response column.", column=response
        )
    kept = [c for c in columns if c not in dropped]

    numeric = raw.select(
        [pl.col(c).str.strip_chars().cast(pl.Float64, strict=False).alias(c) for c in kept]
    )
    for column in kept:
        if numeric.get_column(column).null_count() == numeric.height and numeric.height:
            first_text = raw.get_column(column)[0]
            raise ParseError(
                f"Dataset '{entry.name}' has no numeric value in a column "
                f"(first cell: {first_text!r}).",
                row=1,
                column=column,
            )

    finite = pl.all_horizontal(
        [pl.col(c).is_not_null() & pl.col(c).is_finite() for c in kept]
    )
    cleaned = numeric.filter(finite)
    dropped_rows = raw.height - cleaned.height
    if cleaned.height == 0:
        raise EmptyAfterCleaning(
            f"Dataset '{entry.name}' has no complete numeric row after cleaning "
            f"({raw.height} rows dropped)."
        )
    if dropped_rows:
        logger.info(f"Dataset '{entry.name}': dropped {dropped_rows} incomplete row(s).")

    features = [c for c in kept if c != response]
    dataset = Dataset(
        cleaned.select(features).to_numpy().astype(np.float64),
        cleaned.get_column(response).to_numpy().astype(np.float64),
        name=entry.name,
        feature_names=features,
        response_name=response,
    )
    dataset.origin_file_path = entry.path
    dataset.origin_format = "csv"
    dataset.origin_row_count = raw.height
    dataset.dropped_row_count = dropped_rows

    if entry.catalog_name is not None:
        expected = PAPER_DATASETS.get(entry.catalog_name)
        if expected is None:
            logger.warning(f"Unknown catalog name '{entry.catalog_name}' for '{entry.name}'.")
        elif expected != (dataset.p, dataset.n):
            logger.warning(
                f"Dataset '{entry.name}' has {dataset.p} predictors and {dataset.n} rows; "
                f"'{entry.catalog_name}' is catalogued with {expected[0]} and {expected[1]}."
            )
    return dataset


def _resolve_column(column: Union[str, int], columns: List[str], dataset_name: str) -> str:
    if isinstance(column, int) and not isinstance(column, bool):
        if not 0 <= column < len(columns):
            raise ParseError(
                f"Dataset '{dataset_name}' has {len(columns)} columns; index {column} "
                "is out of range.",
                column=str(column),
            )
        return columns[column]
    if column not in columns:
        raise ParseError(f"Dataset '{dataset_name}' has no such column.", column=str(column))
    return column


def load_manifest(path: str) -> List[DatasetManifestEntry]:
    """Read a JSON array of DatasetManifestEntry objects

    Relative ``path`` values are resolved against the manifest's directory.

    Raises
    ------

    FileNotFoundError
        The manifest does not exist
    ParseError
        The manifest is not a JSON array of objects with the required keys, or two entries
        share a name
    """
    if not os.path.isfile(path):
        raise FileNotFoundError(f"Manifest not found at {path}.")
    with open(path, "r") as f:
        try:
            raw_entries = json.load(f)
        except json.JSONDecodeError as error:
            raise ParseError(f"Manifest {path} is not valid JSON: {error.msg}", row=error.lineno)
    if not isinstance(raw_entries, list):
        raise ParseError(f"Manifest {path} must hold a JSON array of dataset entries.")

    base_dir = os.path.dirname(os.path.abspath(path))
    entries = []
    seen_names = {}
    for position, raw_entry in enumerate(raw_entries, start=1):
        if not isinstance(raw_entry, dict):
            raise ParseError(f"Manifest entry {position} is not an object.", row=position)
        unknown = set(raw_entry) - set(DatasetManifestEntry._fields)
        missing = {"name", "path", "response_column"} - set(raw_entry)
        if unknown or missing:
            raise ParseError(
                f"Manifest entry {position} has unknown keys {sorted(unknown)} or lacks "
                f"required keys {sorted(missing)}.",
                row=position,
            )
        name = str(raw_entry["name"])
        if name in seen_names:
            raise ParseError(
                f"Manifest entry {position} repeats the dataset name '{name}' of entry "
                f"{seen_names[name]}; dataset names must be unique.",
                row=position,
            )
        seen_names[name] = position
        entry_path = raw_entry["path"]
        if not os.path.isabs(entry_path):
            entry_path = os.path.join(base_dir, entry_path)
        entries.append(
            DatasetManifestEntry(
                name=name,
                path=entry_path,
                response_column=raw_entry["response_column"],
                drop_columns=tuple(raw_entry.get("drop_columns", ())),
                delimiter=raw_entry.get("delimiter", ","),
                has_header=bool(raw_entry.get("has_header", True)),
                catalog_name=raw_entry.get("catalog_name"),
            )
        )
    return entries


# ======= Records ========

EvalRecord = NamedTuple(
    "EvalRecord",
    [
        ("method", str),
        ("scenario", str),
        ("replicate", int),
        ("coverage", float),
        ("mean_width", float),
        ("runtime_seconds", float),
    ],
)
EvalRecord.__doc__ = """Coverage and mean width of one (method, scenario or dataset,
    replicate or repeat) evaluation.
    """
EvalRecord.method.__doc__ = "Method label, e.g. ``SC`` or ``k5``."
EvalRecord.scenario.__doc__ = "Scenario identifier (simulation) or dataset name (real data)."
EvalRecord.replicate.__doc__ = "Replicate index (simulation) or repeat index (real data)."
EvalRecord.coverage.__doc__ = "Fraction of test responses inside their intervals."
EvalRecord.mean_width.__doc__ = "Average interval width over the test points."
EvalRecord.runtime_seconds.__doc__ = "Wall-clock time of the fit and evaluation."

RECORDS_SCHEMA = pa.schema(
    [
        ("method", pa.string()),
        ("scenario", pa.string()),
        ("replicate", pa.int64()),
        ("coverage", pa.float64()),
        ("mean_width", pa.float64()),
        ("runtime_seconds", pa.float64()),
    ]
)


def sort_records(records: Sequence[EvalRecord]) -> List[EvalRecord]:
    """Canonical record order: scenario, then method, then replicate"""
    return sorted(records, key=lambda r: (r.scenario, r.method, r.replicate))


def records_to_table(records: Sequence[EvalRecord]) -> pa.Table:
    """Return records as a PyArrow Table in canonical order"""
    return namedtuples_to_table(sort_records(records), RECORDS_SCHEMA)


def table_to_records(table: pa.Table) -> List[EvalRecord]:
    """Return the rows of a records table as EvalRecords"""
    return table_to_namedtuples(table, EvalRecord)


def write_records(records: Union[Sequence[EvalRecord], pa.Table], path: str) -> None:
    """Write records as CSV

    The header is ``method,scenario,replicate,coverage,mean_width,runtime_seconds``;
    rows are sorted by scenario, method and replicate; reals are written in their
    shortest round-trip decimal form, so the file is byte-deterministic and re-reads
    losslessly.

    Parameters
    ----------

    records : Union[Sequence[EvalRecord], pyarrow.Table]
    path : str
        Destination file.
    """
    if isinstance(records, pa.Table):
        records = table_to_records(records)
    table = records_to_table(records)
    for column in ("coverage", "mean_width", "runtime_seconds"):
        table = format_float_column(table, column)
    # Fields are quoted only when they hold a delimiter, a quote or a line break
    pl.from_arrow(table).write_csv(path, include_header=True, quote_style="necessary")


def read_records(path: str) -> List[EvalRecord]:
    """Read a CSV written by ``write_records``"""
    df = pl.read_csv(
        path,
        schema_overrides={
            "method": pl.Utf8,
            "scenario": pl.Utf8,
            "replicate": pl.Int64,
            "coverage": pl.Float64,
            "mean_width": pl.Float64,
            "runtime_seconds": pl.Float64,
        },
    )
    return table_to_records(df.to_arrow())


# ======= Writers ========


def write_file(data, path: str, format: str, *args, **kwargs) -> None:
    """Write data to a file

    Parameters
    ----------

    data : Union[pyarrow.Table, dict, list, str]
        A table for "csv" and "parquet", a JSON-serializable object for "json", a string
        for "txt".
    path : str
        path in filesystem where data is to be written
    format : str
        filetype in "parquet", "csv", "json", "txt"
    """
    format = format.lower()
    accepted_formats = ["parquet", "csv", "json", "txt"]

    if format not in accepted_formats:
        raise ValueError(
            "The format given is not supported. " f"Expected one of {accepted_formats}"
        )
    if format == "parquet":
        pq.write_table(data, path, *args, **kwargs)
    elif format == "csv":
        csv.write_csv(data, path, *args, **kwargs)
    elif format == "json":
        json_object = json.dumps(data, indent=4, sort_keys=True, default=str)
        with open(path, "w") as f:
            f.write(json_object + "\n")
    elif format == "txt":
        with open(path, "w") as f:
            f.write(data)
