from typing import List

from pyarrow import Table


def validate_pyarrow_table(data: Table) -> None:
    """Confirm the data passed is a PyArrow Table

    Raises
    ------

    TypeError
        The data is not a PyArrow table
    """
    if not isinstance(data, Table):
        raise TypeError("Data must be provided in a pyarrow.Table")


def validate_columns(fields: List[str], data: Table) -> None:
    """Confirm every field in ``fields`` is a column of ``data``

    Raises
    ------

    ValueError
        A field is missing from the table
    """
    missing = [field for field in fields if field not in data.column_names]
    if missing:
        raise ValueError(
            f"The table is missing the column(s) {missing}, which this step requires. "
            f"Found columns {data.column_names}."
        )


def validate_alpha(alpha: float) -> None:
    """Confirm a miscoverage level lies strictly between 0 and 1"""
    if not 0 < alpha < 1:
        raise ValueError(f"alpha must lie strictly between 0 and 1, got {alpha}.")


def validate_positive_int(value: int, name: str) -> None:
    if isinstance(value, bool) or int(value) != value or value < 1:
        raise ValueError(f"{name} must be a positive integer, got {value!r}.")
