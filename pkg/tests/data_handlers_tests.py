import json
import os
import shutil
import unittest
from pathlib import Path

import numpy as np
import pandas as pd
import pyarrow as pa

import kfoldpi
from kfoldpi import data
from kfoldpi.data import EvalRecord
from kfoldpi.exceptions import (
    DimensionMismatch,
    EmptyAfterCleaning,
    InsufficientData,
    ParseError,
)
from tests.utils.generate_mock_data import create_mock_data, write_mock_dataset


class TestDataHandlers(unittest.TestCase):
    """Tests the functionality of the functions in kfoldpi.data.data_handlers
    that create kfoldpi Dataset objects from various sources and write records"""

    def setUp(self):
        repo_path = Path().resolve()
        self.write_dir = os.path.join(repo_path, "tests", "test_data", "data_handlers")
        os.makedirs(self.write_dir, exist_ok=True)
        self.manifest_path = write_mock_dataset(self.write_dir)

    def tearDown(self):
        shutil.rmtree(self.write_dir, ignore_errors=True)

    def _write_csv(self, name, text):
        path = os.path.join(self.write_dir, name)
        with open(path, "w") as f:
            f.write(text)
        return path

    def test_dataset_validation(self):
        """Dataset construction rejects mismatched, tiny and non-finite input"""
        dataset = data.from_numpy(np.ones((3, 2)), [1.0, 2.0, 3.0], name="ones")
        self.assertTrue(isinstance(dataset, kfoldpi.Dataset))
        self.assertEqual((dataset.n, dataset.p), (3, 2))
        self.assertEqual(dataset.feature_names, ["x1", "x2"])

        with self.assertRaises(DimensionMismatch):
            data.from_numpy(np.ones((3, 2)), [1.0, 2.0])
        with self.assertRaises(InsufficientData):
            data.from_numpy(np.ones((1, 2)), [1.0])
        with self.assertRaises(ValueError):
            data.from_numpy([[1.0], [np.inf]], [1.0, 2.0])

    def test_subset_and_predictors(self):
        dataset = data.from_numpy(np.arange(10.0).reshape(5, 2), np.arange(5.0))
        subset = dataset.subset([4, 0])
        np.testing.assert_array_equal(subset.y, [4.0, 0.0])
        np.testing.assert_array_equal(subset.x[0], [8.0, 9.0])
        replaced = dataset.with_predictors(np.zeros((5, 3)))
        self.assertEqual(replaced.p, 3)
        np.testing.assert_array_equal(replaced.y, dataset.y)

    def test_dataset_from_pandas(self):
        df = create_mock_data(num_rows=50)
        dataset = data.from_pandas(df, "target", drop_columns=["id"], name="mock")
        self.assertEqual((dataset.n, dataset.p), (50, 3))
        self.assertEqual(dataset.feature_names, ["x1", "x2", "x3"])
        self.assertEqual(dataset.origin_format, "pandas")
        with self.assertRaises(ParseError):
            data.from_pandas(df, "missing")

    def test_dataset_from_manifest_csv(self):
        """The mock manifest resolves its relative path and loads every row"""
        entries = data.load_manifest(self.manifest_path)
        self.assertEqual(len(entries), 1)
        entry = entries[0]
        self.assertTrue(os.path.isabs(entry.path))
        self.assertEqual(entry.drop_columns, ("id",))

        dataset = data.load_csv(entry)
        self.assertEqual((dataset.n, dataset.p), (400, 3))
        self.assertEqual(dataset.response_name, "target")
        self.assertEqual(dataset.origin_format, "csv")
        self.assertEqual(dataset.dropped_row_count, 0)
        source = pd.read_csv(entry.path)
        np.testing.assert_allclose(dataset.y, source["target"].to_numpy())

    def test_incomplete_rows_are_dropped(self):
        path = self._write_csv("gaps.csv", "a,b,y\n1,2,3\n4,,6\n7,x,9\n10,11,12\n")
        entry = data.DatasetManifestEntry("gaps", path, "y")
        with self.assertLogs("kfoldpi.data.data_handlers", level="INFO"):
            dataset = data.load_csv(entry)
        self.assertEqual(dataset.n, 2)
        self.assertEqual(dataset.dropped_row_count, 2)
        self.assertEqual(dataset.origin_row_count, 4)
        np.testing.assert_array_equal(dataset.y, [3.0, 12.0])

    def test_column_by_index_without_header(self):
        path = self._write_csv("noheader.csv", "1;2;3\n4;5;6\n7;8;9\n")
        entry = data.DatasetManifestEntry(
            "noheader", path, 0, drop_columns=(2,), delimiter=";", has_header=False
        )
        dataset = data.load_csv(entry)
        np.testing.assert_array_equal(dataset.y, [1.0, 4.0, 7.0])
        np.testing.assert_array_equal(dataset.x[:, 0], [2.0, 5.0, 8.0])

    def test_parse_errors(self):
        text_column = self._write_csv("text.csv", "a,y\nred,1\nblue,2\n")
        with self.assertRaises(ParseError) as context:
            data.load_csv(data.DatasetManifestEntry("text", text_column, "y"))
        self.assertEqual(context.exception.column, "a")

        with self.assertRaises(ParseError):
            data.load_csv(data.DatasetManifestEntry("text", text_column, "price"))
        with self.assertRaises(ParseError):
            data.load_csv(data.DatasetManifestEntry("text", text_column, 5))

        empty = self._write_csv("empty.csv", "a,y\n1,\n,2\n")
        with self.assertRaises(EmptyAfterCleaning):
            data.load_csv(data.DatasetManifestEntry("empty", empty, "y"))
        with self.assertRaises(FileNotFoundError):
            data.load_csv(data.DatasetManifestEntry("gone", "/no/such/file.csv", "y"))

    def test_catalog_shapes(self):
        self.assertEqual(len(data.PAPER_DATASETS), 10)
        predictors, rows = data.PAPER_DATASETS["Power Plant"]
        self.assertEqual((rows, predictors + 1), (9568, 5))

        entry = data.load_manifest(self.manifest_path)[0]._replace(catalog_name="Bodyfat")
        with self.assertLogs("kfoldpi.data.data_handlers", level="WARNING"):
            data.load_csv(entry)

    def test_manifest_errors(self):
        with self.assertRaises(FileNotFoundError):
            data.load_manifest(os.path.join(self.write_dir, "none.json"))
        bad_key = os.path.join(self.write_dir, "bad.json")
        with open(bad_key, "w") as f:
            json.dump([{"name": "a", "path": "a.csv", "target": "y"}], f)
        with self.assertRaises(ParseError):
            data.load_manifest(bad_key)
        not_list = os.path.join(self.write_dir, "object.json")
        with open(not_list, "w") as f:
            json.dump({"name": "a"}, f)
        with self.assertRaises(ParseError):
            data.load_manifest(not_list)

    def test_records_file(self):
        """Records are written sorted, with a fixed header, and re-read losslessly"""
        records = [
            EvalRecord("k5", "b", 0, 0.9, 1.2345678901234567, 0.0),
            EvalRecord("SC", "b", 1, 0.875, 2.0, 0.0),
            EvalRecord("SC", "a", 0, 1.0, 0.1, 0.0),
        ]
        path = os.path.join(self.write_dir, "records.csv")
        data.write_records(records, path)
        with open(path, "r") as f:
            lines = f.read().splitlines()
        self.assertEqual(lines[0], "method,scenario,replicate,coverage,mean_width,runtime_seconds")
        self.assertEqual(lines[1], "SC,a,0,1.0,0.1,0.0")
        self.assertEqual(len(lines), 4)
        self.assertEqual(data.read_records(path), data.sort_records(records))

        with open(path, "rb") as f:
            first_bytes = f.read()
        data.write_records(data.records_to_table(records), path)
        with open(path, "rb") as f:
            self.assertEqual(f.read(), first_bytes)

    def test_manifest_rejects_repeated_names(self):
        repeated = os.path.join(self.write_dir, "repeated.json")
        with open(repeated, "w") as f:
            json.dump(
                [
                    {"name": "a", "path": "a.csv", "response_column": "y"},
                    {"name": "a", "path": "b.csv", "response_column": "y"},
                ],
                f,
            )
        with self.assertRaises(ParseError) as context:
            data.load_manifest(repeated)
        self.assertEqual(context.exception.row, 2)

    def test_records_with_structural_characters(self):
        """Names holding the delimiter or a quote are quoted and re-read intact"""
        records = [
            EvalRecord("SC", 'boston, "housing"', 0, 0.9, 1.5, 0.0),
            EvalRecord("SC", "plain", 0, 1.0, 2.0, 0.0),
        ]
        path = os.path.join(self.write_dir, "quoted.csv")
        data.write_records(records, path)
        with open(path, "r") as f:
            lines = f.read().splitlines()
        self.assertEqual(lines[1], 'SC,"boston, ""housing""",0,0.9,1.5,0.0')
        self.assertEqual(lines[2], "SC,plain,0,1.0,2.0,0.0")
        self.assertEqual(data.read_records(path), data.sort_records(records))

    def test_records_table(self):
        table = data.records_to_table([])
        self.assertIsInstance(table, pa.Table)
        self.assertEqual(table.num_rows, 0)
        self.assertEqual(table.column_names, list(EvalRecord._fields))

    def test_write_file(self):
        json_path = os.path.join(self.write_dir, "meta.json")
        data.write_file({"b": 1, "a": [1, 2]}, json_path, "json")
        with open(json_path, "r") as f:
            self.assertEqual(json.load(f), {"a": [1, 2], "b": 1})
        txt_path = os.path.join(self.write_dir, "summary.txt")
        data.write_file("hello\n", txt_path, "txt")
        with open(txt_path, "r") as f:
            self.assertEqual(f.read(), "hello\n")
        with self.assertRaises(ValueError):
            data.write_file("x", txt_path, "docx")
