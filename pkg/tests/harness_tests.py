import unittest

import numpy as np
import pyarrow as pa

from kfoldpi.data import EvalRecord, from_numpy, records_to_table
from kfoldpi.exceptions import CellFailure, DuplicateRecords, MissingBaseline, NonFiniteLoss
from kfoldpi.inference import harness
from kfoldpi.inference.conformal import kfold_conformal
from kfoldpi.inference.harness import MethodSpec, parse_method
from kfoldpi.inference.regressors import (
    ConstantTrainer,
    FunctionRegressor,
    OracleTrainer,
    Trainer,
)
from kfoldpi.inference.rng import derive_stream
from kfoldpi.inference.simulator import MeanFunction, ScenarioSpec


class FailingTrainer(Trainer):
    def fit(self, data, stream):
        raise RuntimeError("cannot fit")


class DivergeOnceTrainer(Trainer):
    """Diverges unless it is fit on a retry stream"""

    def fit(self, data, stream):
        if harness.RETRY_KEY not in stream.path:
            raise NonFiniteLoss(1, float("nan"))
        return FunctionRegressor(MeanFunction("linear"))


def _record(method, scenario, replicate, coverage, width):
    return EvalRecord(method, scenario, replicate, coverage, width, 0.0)


class TestHarness(unittest.TestCase):
    """Tests the evaluation protocols and aggregation in kfoldpi.inference.harness"""

    def setUp(self):
        self.oracle = OracleTrainer(MeanFunction("linear"))
        self.methods = [parse_method("sc"), parse_method("k5")]
        self.spec = ScenarioSpec("linear", "homoscedastic", 100, n_test=50, replicates=5)

    def test_parse_method(self):
        self.assertEqual(parse_method("SC"), MethodSpec("SC", "split", 2))
        self.assertEqual(parse_method("k10"), MethodSpec("k10", "kfold", 10))
        self.assertEqual(parse_method("kfold(3)"), MethodSpec("k3", "kfold", 3))
        for text in ("k1", "cv", "kfold()", "k"):
            with self.assertRaises(ValueError):
                parse_method(text)
        labels = sorted(["k10", "k2", "SC", "k5"], key=harness.method_sort_key)
        self.assertEqual(labels, ["SC", "k2", "k5", "k10"])

    def test_coverage_counts_bounds_as_covered(self):
        generator = np.random.default_rng(0)
        train = from_numpy(generator.standard_normal((20, 2)), generator.standard_normal(20))
        model = kfold_conformal(train, ConstantTrainer(0.0), 4, 0.1, derive_stream(1, [0]))
        h = model.half_width
        test = from_numpy(np.zeros((3, 2)), [h, -h, h + 1.0])
        coverage, width = harness.evaluate_intervals(model, test)
        self.assertAlmostEqual(coverage, 2 / 3)
        self.assertAlmostEqual(width, 2 * h)

    def test_run_scenario_records(self):
        records = harness.run_scenario(self.spec, self.methods, self.oracle, master_seed=42)
        self.assertEqual(len(records), 10)
        canonical = sorted(records, key=lambda r: (r.scenario, r.method, r.replicate))
        self.assertEqual(records, canonical)
        self.assertEqual({r.method for r in records}, {"SC", "k5"})
        self.assertEqual({r.replicate for r in records}, set(range(5)))
        for record in records:
            self.assertTrue(0.0 <= record.coverage <= 1.0)
            self.assertGreater(record.mean_width, 0.0)

    def test_runs_are_reproducible_across_workers(self):
        strip = lambda records: [r._replace(runtime_seconds=0.0) for r in records]  # noqa: E731
        sequential = harness.run_scenario(self.spec, self.methods, self.oracle, 42, workers=1)
        again = harness.run_scenario(self.spec, self.methods, self.oracle, 42, workers=1)
        parallel = harness.run_scenario(self.spec, self.methods, self.oracle, 42, workers=2)
        self.assertEqual(strip(sequential), strip(again))
        self.assertEqual(strip(sequential), strip(parallel))
        other_seed = harness.run_scenario(self.spec, self.methods, self.oracle, 43)
        self.assertNotEqual(strip(sequential), strip(other_seed))

    def test_method_subset_does_not_change_shared_records(self):
        """SC records are the same whether or not k5 runs alongside"""
        both = harness.run_scenario(self.spec, self.methods, self.oracle, 42)
        alone = harness.run_scenario(self.spec, [parse_method("sc")], self.oracle, 42)
        self.assertEqual(
            [(r.coverage, r.mean_width) for r in both if r.method == "SC"],
            [(r.coverage, r.mean_width) for r in alone],
        )

    def test_failures_are_collected_or_raised(self):
        failures = []
        records = harness.run_scenario(
            self.spec, self.methods, FailingTrainer(), 42, failures=failures
        )
        self.assertEqual(records, [])
        self.assertEqual(len(failures), 10)
        self.assertIsInstance(failures[0], CellFailure)
        self.assertEqual(failures[0].scenario, "linear-homoscedastic-100")
        with self.assertRaises(CellFailure):
            harness.run_scenario(self.spec, self.methods, FailingTrainer(), 42)

    def test_non_finite_loss_is_retried_once(self):
        with self.assertLogs("kfoldpi.inference.harness", level="WARNING"):
            records = harness.run_scenario(
                self.spec._replace(replicates=1), self.methods, DivergeOnceTrainer(), 42
            )
        self.assertEqual(len(records), 2)

    def test_outer_partition_and_standardize(self):
        folds = harness.outer_partition(23, 5, derive_stream(1, [0]))
        np.testing.assert_array_equal(np.sort(np.concatenate(folds)), np.arange(23))

        train_x = np.array([[1.0, 5.0], [3.0, 5.0], [5.0, 5.0]])
        test_x = np.array([[3.0, 6.0]])
        scaled_train, scaled_test = harness.standardize(train_x, test_x)
        np.testing.assert_allclose(scaled_train[:, 0], [-1.0, 0.0, 1.0])
        np.testing.assert_allclose(scaled_train[:, 1], [0.0, 0.0, 0.0])
        np.testing.assert_allclose(scaled_test, [[0.0, 1.0]])

    def test_run_real_dataset(self):
        generator = np.random.default_rng(5)
        x = generator.standard_normal((60, 2))
        data = from_numpy(x, x[:, 0] + generator.standard_normal(60), name="toy")
        records = harness.run_real_dataset(
            data, self.methods, ConstantTrainer(0.0), outer_folds=5, repeats=2, master_seed=42
        )
        self.assertEqual(len(records), 4)
        self.assertEqual(
            {(r.method, r.replicate) for r in records},
            {("SC", 0), ("SC", 1), ("k5", 0), ("k5", 1)},
        )
        self.assertTrue(all(r.scenario == "toy" for r in records))
        again = harness.run_real_dataset(
            data, self.methods, ConstantTrainer(0.0), outer_folds=5, repeats=2, master_seed=42
        )
        self.assertEqual(
            [(r.coverage, r.mean_width) for r in records],
            [(r.coverage, r.mean_width) for r in again],
        )

    def test_real_dataset_constant_response(self):
        x = np.random.default_rng(6).standard_normal((50, 2))
        data = from_numpy(x, np.full(50, 3.5), name="flat")
        records = harness.run_real_dataset(
            data, self.methods, ConstantTrainer(3.5), outer_folds=5, repeats=2, master_seed=42
        )
        self.assertEqual(len(records), 4)
        for record in records:
            self.assertEqual(record.coverage, 1.0)
            self.assertEqual(record.mean_width, 0.0)

    def test_aggregate_and_ratios(self):
        records = [
            _record("SC", "s", 0, 0.9, 2.0),
            _record("SC", "s", 1, 0.8, 4.0),
            _record("k5", "s", 0, 0.92, 1.0),
            _record("k5", "s", 1, 0.88, 4.0),
        ]
        summaries = harness.aggregate(records)
        self.assertEqual([s.method for s in summaries], ["SC", "k5"])
        k5 = summaries[1]
        self.assertEqual(k5.replicates, 2)
        self.assertAlmostEqual(k5.mean_coverage, 0.9)
        self.assertAlmostEqual(k5.mean_width, 2.5)
        self.assertAlmostEqual(k5.log2_width_ratio, 0.5)  # mean of log2(2/1) and log2(4/4)
        self.assertEqual(summaries[0].log2_width_ratio, 0.0)
        for actual, expected in zip(summaries[0].coverage_quartiles, (0.825, 0.85, 0.875)):
            self.assertAlmostEqual(actual, expected)

        no_ratios = harness.aggregate(records, ratios=False)
        self.assertTrue(all(s.log2_width_ratio is None for s in no_ratios))

    def test_missing_baseline(self):
        records = [_record("k5", "s", 0, 0.9, 1.0)]
        self.assertIsNone(harness.aggregate(records)[0].log2_width_ratio)
        with self.assertRaises(MissingBaseline):
            harness.aggregate(records, ratios=True)
        with self.assertRaises(MissingBaseline):
            harness.paired_width_ratios(records)

    def test_unpaired_records_are_left_out(self):
        records = [
            _record("SC", "s", 0, 0.9, 2.0),
            _record("k5", "s", 0, 0.9, 1.0),
            _record("k5", "s", 1, 0.9, 1.0),
        ]
        with self.assertLogs("kfoldpi.inference.harness", level="WARNING"):
            paired = harness.paired_width_ratios(records)
        self.assertEqual(paired.filter(paired["method"] == "k5").height, 1)

    def test_duplicate_records_rejected(self):
        records = [_record("SC", "s", 0, 0.9, 2.0), _record("SC", "s", 0, 0.8, 2.0)]
        with self.assertRaises(DuplicateRecords):
            harness.aggregate(records)

    def test_steps(self):
        runner = harness.SimulationRunner([self.spec], self.methods, self.oracle, master_seed=42)
        table, artifacts = runner.run(records_to_table([]), {})
        self.assertIsInstance(table, pa.Table)
        self.assertEqual(table.num_rows, 10)
        self.assertEqual(set(table.column("runtime_seconds").to_pylist()), {0.0})
        self.assertEqual(artifacts["failures"], [])
        self.assertEqual(runner.get_parameters()["methods"], ["SC", "k5"])

        data, summary_artifacts = harness.Aggregator().run(table, artifacts)
        self.assertIsNone(data)
        self.assertEqual(len(summary_artifacts["summaries"]), 2)
        self.assertEqual(summary_artifacts["paired_ratios"].height, 10)

        with self.assertRaises(TypeError):
            harness.Aggregator().run(table.to_pandas(), {})
