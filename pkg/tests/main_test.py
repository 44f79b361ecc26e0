"""kfoldpi test driver. Executes tests of all the modules.
Run with:
`python -m tests.main_test`
Set KFOLDPI_SLOW=1 to include the full selftest and network-training tests.
"""
import unittest

from tests.cli_tests import TestCli
from tests.config_tests import TestConfig
from tests.conformal_tests import TestConformal
from tests.data_handlers_tests import TestDataHandlers
from tests.harness_tests import TestHarness
from tests.linalg_tests import TestLinalg
from tests.mlp_tests import TestMlp
from tests.pipeline_tests import TestPipeline
from tests.polars_utils_tests import TestPolarsUtils
from tests.report_tests import TestReport
from tests.rng_tests import TestRng
from tests.selftest_tests import TestSelftest
from tests.simulator_tests import TestSimulator


def suite(module_name):
    """Build a test suite from module's TestCase"""
    loader = unittest.TestLoader()
    suite = loader.loadTestsFromTestCase(module_name)
    return suite


def main():
    runner = unittest.TextTestRunner()

    # Test Data Handler Module
    print("Test Data Handlers Module")
    runner.run(suite(TestDataHandlers))

    # Test Random Streams
    print("Test RNG Module")
    runner.run(suite(TestRng))

    # Test Linear Algebra Helpers
    print("Test Linalg Module")
    runner.run(suite(TestLinalg))

    # Test Polars Utils
    print("Test Polars Utils")
    runner.run(suite(TestPolarsUtils))

    # Test Network Regressor
    print("Test MLP Module")
    runner.run(suite(TestMlp))

    # Test Conformal Intervals
    print("Test Conformal Module")
    runner.run(suite(TestConformal))

    # Test Simulator
    print("Test Simulator Module")
    runner.run(suite(TestSimulator))

    # Test Evaluation Harness
    print("Test Harness Module")
    runner.run(suite(TestHarness))

    # Test Reports
    print("Test Report Module")
    runner.run(suite(TestReport))

    # Test Pipeline
    print("Test Pipeline Module!")
    runner.run(suite(TestPipeline))

    # Test Configuration
    print("Test Config Module")
    runner.run(suite(TestConfig))

    # Test Selftest Suites
    print("Test Selftest Module")
    runner.run(suite(TestSelftest))

    # Test Command Line
    print("Test CLI Module")
    runner.run(suite(TestCli))


if __name__ == "__main__":
    main()
