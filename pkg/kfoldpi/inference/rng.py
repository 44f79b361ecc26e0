"""Deterministic, splittable random streams and the samplers used by the simulation study"""

import hashlib
from typing import Iterable, Sequence, Tuple

import numpy as np

MAX_SEED = 2**64 - 1
DEFAULT_SEED = 42


class RngStream:
    """A single-owner random stream keyed by a master seed and a derivation path

    The stream wraps a numpy ``Generator`` driven by the counter-based Philox bit
    generator. Its seed material is ``SeedSequence(master_seed, spawn_key=path)``, so a
    stream re-created from the same ``(master_seed, path)`` reproduces its sequence
    exactly and streams on distinct paths never share state.

    Note
    ----

    A stream must not be used from two threads at once. Distinct streams may be used
    concurrently.

    Attributes
    ----------

    master_seed : int
        Unsigned 64-bit master seed.
    path : Tuple[int, ...]
        Derivation path; its last element is the stream id.
    generator : numpy.random.Generator
        The underlying generator.
    """

    def __init__(self, master_seed: int, path: Sequence[int]):
        """Constructor method"""
        master_seed = int(master_seed)
        if master_seed < 0 or master_seed > MAX_SEED:
            raise ValueError("The master seed must be an unsigned 64-bit integer.")
        path = tuple(int(key) for key in path)
        if any(key < 0 for key in path):
            raise ValueError("Stream path entries must be non-negative integers.")
        self.master_seed = master_seed
        self.path = path
        seed_sequence = np.random.SeedSequence(entropy=master_seed, spawn_key=path)
        self.generator = np.random.Generator(np.random.Philox(seed_sequence))

    @property
    def stream_id(self) -> int:
        """Identifier of the stream within its parent (last path element)"""
        return self.path[-1] if self.path else 0

    def child(self, *keys: int) -> "RngStream":
        """Derive a sub-stream whose path extends this stream's path by ``keys``"""
        return derive_stream(self.master_seed, self.path + tuple(keys))

    def __repr__(self) -> str:
        return f"RngStream(master_seed={self.master_seed}, path={list(self.path)})"


def derive_stream(master_seed: int, path: Iterable[int]) -> RngStream:
    """Create the stream identified by ``(master_seed, path)``

    Parameters
    ----------

    master_seed : int
        Unsigned 64-bit master seed (the CLI ``--seed``).
    path : Iterable[int]
        Sequence of non-negative integers naming the stream.

    Returns
    -------

    RngStream
        A stream whose output is a pure function of ``(master_seed, path)``.
    """
    return RngStream(master_seed, list(path))


def name_key(name: str) -> int:
    """Stable 32-bit key of a name, used to place named units on stream paths"""
    return int.from_bytes(hashlib.sha256(name.encode("utf-8")).digest()[:4], "big")


def sample_std_normal(stream: RngStream, count: int) -> np.ndarray:
    """Draw ``count`` i.i.d. standard normal values (numpy's ziggurat sampler)"""
    _validate_count(count)
    return stream.generator.standard_normal(count)


def sample_normal_matrix(stream: RngStream, shape: Tuple[int, int]) -> np.ndarray:
    """Draw a matrix of i.i.d. standard normal values in row-major order"""
    return stream.generator.standard_normal(shape)


def sample_scaled_t3(stream: RngStream, count: int) -> np.ndarray:
    """Draw ``count`` values distributed as t3 / sqrt(3) (unit variance)

    A draw is ``Z / sqrt(V / 3) / sqrt(3)`` with ``Z ~ N(0, 1)`` and ``V ~ chi2(3)``
    sampled as the sum of three squared standard normals. The ``Z`` block is drawn
    first, then the ``3 * count`` normals forming ``V``.
    """
    _validate_count(count)
    z = stream.generator.standard_normal(count)
    chi_components = stream.generator.standard_normal((count, 3))
    v = np.sum(chi_components**2, axis=1)
    return z / np.sqrt(v / 3.0) / np.sqrt(3.0)


def sample_uniform(stream: RngStream, low: float, high: float, shape) -> np.ndarray:
    """Draw uniform values on ``[low, high)``"""
    return stream.generator.uniform(low, high, size=shape)


def sample_indices(stream: RngStream, population: int, shape) -> np.ndarray:
    """Draw indices uniformly with replacement from ``range(population)``"""
    return stream.generator.integers(0, population, size=shape)


def permutation(stream: RngStream, n: int) -> np.ndarray:
    """Return a seeded permutation of ``range(n)``"""
    return stream.generator.permutation(n)


def _validate_count(count: int) -> None:
    if int(count) < 1:
        raise ValueError("The number of draws must be a positive integer.")
