from typing import List

import polars as pl

from kfoldpi.exceptions import DuplicateRecords

KEY_COLUMNS = ["scenario", "method", "replicate"]


def validate_unique_keys(df: pl.DataFrame) -> None:
    """Raise if a (scenario, method, replicate) triple occurs more than once"""
    duplicated = df.group_by(KEY_COLUMNS).len().filter(pl.col("len") > 1)
    if duplicated.height:
        first = duplicated.row(0, named=True)
        raise DuplicateRecords(
            "Records must be unique per (scenario, method, replicate); found "
            f"{first['len']} records for ({first['scenario']}, {first['method']}, "
            f"{first['replicate']})."
        )


def pair_with_baseline(df: pl.DataFrame, baseline: str) -> pl.DataFrame:
    """Attach ``log2_ratio = log2(width_baseline / width_method)`` to every record

    Records are paired with the baseline record of the same (scenario, replicate) only.
    Records without a baseline partner are dropped from the result. Two zero widths
    count as equal (ratio 0).

    Parameters
    ----------

    df : pl.DataFrame
        Records with at least the columns scenario, method, replicate, mean_width.
    baseline : str
        Method label of the baseline, e.g. ``SC``.

    Returns
    -------

    pl.DataFrame
        The paired records with a ``baseline_width`` and a ``log2_ratio`` column.
    """
    base = df.filter(pl.col("method") == baseline).select(
        "scenario", "replicate", pl.col("mean_width").alias("baseline_width")
    )
    paired = df.join(base, on=["scenario", "replicate"], how="inner")
    return paired.with_columns(
        pl.when(pl.col("baseline_width") == pl.col("mean_width"))
        .then(pl.lit(0.0))
        .otherwise((pl.col("baseline_width") / pl.col("mean_width")).log(2))
        .alias("log2_ratio")
    ).sort(KEY_COLUMNS)


def unpaired_records(df: pl.DataFrame, baseline: str) -> pl.DataFrame:
    """Records whose (scenario, replicate) has no baseline record"""
    base = df.filter(pl.col("method") == baseline).select("scenario", "replicate")
    return df.join(base, on=["scenario", "replicate"], how="anti").sort(KEY_COLUMNS)


def group_values(df: pl.DataFrame, value: str, scenario: str, methods: List[str]) -> dict:
    """Values of ``value`` for one scenario, keyed by method in the order given"""
    subset = df.filter(pl.col("scenario") == scenario).sort("replicate")
    groups = {}
    for method in methods:
        values = subset.filter(pl.col("method") == method)[value].to_list()
        if values:
            groups[method] = values
    return groups
