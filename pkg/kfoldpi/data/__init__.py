from kfoldpi.data.data_handlers import Dataset
from kfoldpi.data.data_handlers import (
    PAPER_DATASETS,
    RECORDS_SCHEMA,
    RECORDS_SCHEMA_VERSION,
    DatasetManifestEntry,
    EvalRecord,
    from_numpy,
    from_pandas,
    load_csv,
    load_manifest,
    read_records,
    records_to_table,
    sort_records,
    table_to_records,
    write_file,
    write_records,
)
