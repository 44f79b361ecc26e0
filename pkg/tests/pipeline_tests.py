import os
import shutil
import unittest
from pathlib import Path

import pyarrow as pa
import pyarrow.parquet as pq

from kfoldpi import Pipeline, Step
from kfoldpi.data import read_records
from kfoldpi.inference.harness import Aggregator, SimulationRunner, parse_method
from kfoldpi.inference.regressors import OracleTrainer
from kfoldpi.inference.report import ReportWriter
from kfoldpi.inference.simulator import MeanFunction, ScenarioSpec
from kfoldpi.pipeline import merge_artifacts


class NotATupleStep(Step):
    def __init__(self):
        super().__init__()

    def run(self, data, artifacts):
        return data


class WrongSchemaStep(Step):
    def __init__(self):
        super().__init__()

    def run(self, data, artifacts):
        return pa.table({"method": ["SC"]}), None


class TestPipeline(unittest.TestCase):
    """Tests the functionality of the Pipeline class"""

    def setUp(self):
        test_data_dir = os.path.join(Path().resolve(), "tests", "test_data")
        self.write_dir = f"{test_data_dir}/outputs"

        if os.path.exists(self.write_dir):
            shutil.rmtree(self.write_dir)
        os.makedirs(self.write_dir)

        # a small oracle-fitted scenario: 3 replicates of SC and k5
        self.scenarios = [
            ScenarioSpec("linear", "homoscedastic", 60, n_test=30, replicates=3)
        ]
        self.methods = [parse_method("sc"), parse_method("k5")]
        self.trainer = OracleTrainer(MeanFunction("linear"))

    def tearDown(self):
        if os.path.exists(self.write_dir):
            shutil.rmtree(self.write_dir)

    def _add_steps(self, pipeline):
        pipeline.add_step(SimulationRunner(self.scenarios, self.methods, self.trainer))
        pipeline.add_step(Aggregator())
        pipeline.add_step(ReportWriter())

    def test_adding_steps(self):
        """Test that steps are added to the pipeline as expected"""
        self.pipeline = Pipeline(write_path=self.write_dir, write_outputs="pipeline-outputs")
        self._add_steps(self.pipeline)

        # check the number of steps
        correct_ans = 3
        self.assertEqual(
            self.pipeline.num_steps,
            correct_ans,
            ("Pipeline's num_steps attribute returns " "an incorrect value"),
        )
        with self.assertRaises(TypeError):
            self.pipeline.add_step("not a step")

    def test_write_path_required(self):
        with self.assertRaises(ValueError):
            Pipeline(write_path=None, write_outputs="pipeline-outputs")
        Pipeline(write_outputs=False)

    def test_global_write_config_applied(self):
        """Test that applying a non-default global write config will
        apply to the writing of data from each step"""
        write_config = {"data_format": "parquet", "data_format_args": {}}
        self.pipeline = Pipeline(
            write_path=self.write_dir,
            write_outputs="debug",
            data_write_config=write_config,
        )
        self._add_steps(self.pipeline)

        for step in self.pipeline.steps:
            self.assertEqual(step._data_write_config, write_config)

        self.pipeline.run_pipeline()
        test_data_contents = os.listdir(self.write_dir)
        self.assertIn("SimulationRunnerData.parquet", test_data_contents)
        self.assertIn("records.parquet", test_data_contents)
        table = pq.read_table(os.path.join(self.write_dir, "records.parquet"))
        self.assertEqual(table.num_rows, 6)

    def test_pipeline_run(self):
        self.pipeline = Pipeline(write_path=self.write_dir, write_outputs="pipeline-outputs")
        self._add_steps(self.pipeline)

        # test that pipeline runs without failure
        self.pipeline.run_pipeline()

        # test that expected file outputs exist
        test_data_contents = os.listdir(self.write_dir)
        expected_files = [
            "records.csv",
            "summary.txt",
            "coverage_linear-homoscedastic-60.svg",
            "ratio_linear-homoscedastic-60.svg",
        ]
        self.assertTrue(set(expected_files).issubset(set(test_data_contents)))
        self.assertNotIn("SimulationRunnerData.csv", test_data_contents)

        records = read_records(os.path.join(self.write_dir, "records.csv"))
        self.assertEqual(len(records), 6)
        self.assertEqual(self.pipeline.processed_data.num_rows, 6)
        self.assertEqual(len(self.pipeline.artifacts["summaries"]), 2)

    def test_pipeline_without_outputs(self):
        self.pipeline = Pipeline(write_outputs=False)
        self._add_steps(self.pipeline)
        self.pipeline.run_pipeline()
        self.assertEqual(self.pipeline.processed_data.num_rows, 6)
        self.assertEqual(os.listdir(self.write_dir), [])

    def test_step_must_return_tuple(self):
        self.pipeline = Pipeline(write_outputs=False)
        self.pipeline.add_step(NotATupleStep())
        with self.assertRaises(TypeError):
            self.pipeline.run_pipeline()

    def test_merge_artifacts_appends_lists(self):
        merged = merge_artifacts(
            {"failures": ["a"], "summaries": [1], "report": "old"},
            {"failures": ["b"], "report": "new", "paired_ratios": None},
        )
        self.assertEqual(merged["failures"], ["a", "b"])
        self.assertEqual(merged["summaries"], [1])
        self.assertEqual(merged["report"], "new")
        self.assertIsNone(merged["paired_ratios"])

    def test_step_must_return_records_schema(self):
        self.pipeline = Pipeline(write_outputs=False)
        self.pipeline.add_step(WrongSchemaStep())
        with self.assertRaises(TypeError):
            self.pipeline.run_pipeline()

    def test_getting_parameters(self):
        # create pipeline
        self.pipeline = Pipeline(write_path=self.write_dir, write_outputs="debug")
        self._add_steps(self.pipeline)

        # run pipeline
        self.pipeline.run_pipeline()

        # test condensed params
        pipeline_params = self.pipeline.get_parameters(condensed=True)
        self.assertEqual(
            set(pipeline_params["steps"]), {"SimulationRunner", "Aggregator", "ReportWriter"}
        )
        self.assertNotIn("record_timings", pipeline_params["steps"]["SimulationRunner"])
        self.assertIn("memory (MB)", pipeline_params["performance"]["SimulationRunner"])
        self.assertIn("Pipeline", pipeline_params["performance"])

        full_params = self.pipeline.get_parameters(condensed=False)
        self.assertFalse(full_params["steps"]["SimulationRunner"]["record_timings"])


if __name__ == "__main__":
    unittest.main()
