import os
import unittest

import numpy as np
from scipy import stats

from kfoldpi.inference import rng
from kfoldpi.inference.rng import RngStream, derive_stream

SLOW = os.environ.get("KFOLDPI_SLOW") == "1"


class TestRng(unittest.TestCase):
    """Tests the seeded streams and samplers in kfoldpi.inference.rng"""

    def test_same_path_reproduces_sequence(self):
        """Two streams built from the same seed and path draw identical values"""
        first = rng.sample_std_normal(derive_stream(42, [0, 7, 3]), 100)
        second = rng.sample_std_normal(derive_stream(42, [0, 7, 3]), 100)
        np.testing.assert_array_equal(first, second)

    def test_distinct_paths_and_seeds_differ(self):
        base = rng.sample_std_normal(derive_stream(42, [0, 1]), 50)
        other_path = rng.sample_std_normal(derive_stream(42, [0, 2]), 50)
        other_seed = rng.sample_std_normal(derive_stream(43, [0, 1]), 50)
        self.assertFalse(np.array_equal(base, other_path), "Sibling paths share a sequence")
        self.assertFalse(np.array_equal(base, other_seed), "Seeds do not change the sequence")

    def test_child_extends_path(self):
        """child() is the same stream as deriving the extended path directly"""
        parent = derive_stream(5, [1, 2])
        child = parent.child(3, 4)
        self.assertEqual(child.path, (1, 2, 3, 4))
        self.assertEqual(child.stream_id, 4)
        np.testing.assert_array_equal(
            rng.sample_uniform(child, 0, 1, 10),
            rng.sample_uniform(derive_stream(5, [1, 2, 3, 4]), 0, 1, 10),
        )

    def test_child_independent_of_parent_use(self):
        """Drawing from a parent does not move its children"""
        used = derive_stream(9, [0])
        rng.sample_std_normal(used, 1000)
        fresh = derive_stream(9, [0])
        np.testing.assert_array_equal(
            rng.sample_std_normal(used.child(1), 5), rng.sample_std_normal(fresh.child(1), 5)
        )

    def test_invalid_seed_and_path(self):
        with self.assertRaises(ValueError):
            RngStream(-1, [0])
        with self.assertRaises(ValueError):
            RngStream(rng.MAX_SEED + 1, [0])
        with self.assertRaises(ValueError):
            RngStream(1, [0, -3])
        with self.assertRaises(ValueError):
            rng.sample_std_normal(derive_stream(1, [0]), 0)

    def test_name_key_is_stable(self):
        self.assertEqual(rng.name_key("SC"), rng.name_key("SC"))
        self.assertNotEqual(rng.name_key("SC"), rng.name_key("k5"))
        self.assertLess(rng.name_key("linear-homoscedastic-500"), 2**32)

    def test_std_normal_distribution(self):
        draws = rng.sample_std_normal(derive_stream(42, [10]), 20000)
        self.assertAlmostEqual(float(np.mean(draws)), 0.0, delta=0.03)
        self.assertAlmostEqual(float(np.var(draws)), 1.0, delta=0.04)
        self.assertGreater(stats.kstest(draws, "norm").pvalue, 1e-3)

    def test_scaled_t3_tails(self):
        """t3 / sqrt(3) matches the scaled Student t tail probability"""
        draws = rng.sample_scaled_t3(derive_stream(42, [11]), 200000)
        expected = 2 * stats.t.sf(1.9 * np.sqrt(3.0), df=3)
        observed = float(np.mean(np.abs(draws) > 1.9))
        self.assertAlmostEqual(observed, expected, delta=0.003)
        self.assertAlmostEqual(float(np.median(draws)), 0.0, delta=0.01)

    def test_permutation_and_indices(self):
        perm = rng.permutation(derive_stream(3, [0]), 25)
        np.testing.assert_array_equal(np.sort(perm), np.arange(25))
        indices = rng.sample_indices(derive_stream(3, [1]), 7, (100, 4))
        self.assertEqual(indices.shape, (100, 4))
        self.assertTrue(np.all((indices >= 0) & (indices < 7)))

    def test_scaled_t3_distribution(self):
        """t3 / sqrt(3) follows Student t with 3 degrees of freedom and scale 1 / sqrt(3)"""
        draws = rng.sample_scaled_t3(derive_stream(42, [12]), 100000)
        reference = stats.t(df=3, scale=1 / np.sqrt(3.0))
        self.assertLess(stats.kstest(draws, reference.cdf).statistic, 0.01)

    @unittest.skipUnless(SLOW, "set KFOLDPI_SLOW=1 to check the heavy-tailed variance")
    def test_scaled_t3_unit_variance(self):
        draws = rng.sample_scaled_t3(derive_stream(42, [13]), 10**6)
        self.assertAlmostEqual(float(np.var(draws)), 1.0, delta=0.05)

    def test_sibling_streams_uncorrelated(self):
        parent = derive_stream(42, [0, 5])
        first = rng.sample_std_normal(parent.child(0), 10**6)
        second = rng.sample_std_normal(parent.child(1), 10**6)
        self.assertLess(abs(float(np.corrcoef(first, second)[0, 1])), 0.01)
