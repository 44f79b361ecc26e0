from typing import List, NamedTuple, Sequence, Type

import pyarrow as pa


def namedtuples_to_table(rows: Sequence[NamedTuple], schema: pa.Schema) -> pa.Table:
    # Build the table column by column so an empty row list still carries the schema
    columns = {
        field.name: pa.array([getattr(row, field.name) for row in rows], type=field.type)
        for field in schema
    }
    return pa.Table.from_pydict(columns, schema=schema)


def table_to_namedtuples(table: pa.Table, row_type: Type[NamedTuple]) -> List[NamedTuple]:
    # Only the fields of row_type are read; extra columns are ignored
    columns = [table.column(name).to_pylist() for name in row_type._fields]
    return [row_type(*values) for values in zip(*columns)]


def format_float_column(table: pa.Table, name: str) -> pa.Table:
    # Shortest round-trip decimal form of every value (Python's repr)
    position = table.schema.get_field_index(name)
    formatted = pa.array([repr(float(v)) for v in table.column(name).to_pylist()], pa.string())
    return table.set_column(position, name, formatted)
