"""Shared fixtures for the test suite."""

from pathlib import Path

import numpy as np
import pytest

from codakit import CompositionMatrix, RawCountMatrix

TELLUS_PATH = Path(__file__).resolve().parents[1] / "data" / "tellus.csv"

needs_tellus = pytest.mark.skipif(
    not TELLUS_PATH.exists(),
    reason="Tellus dataset not fetched (see scripts/fetch_tellus.py)",
)


def random_composition(seed, n=20, d=8, concentration=2.0, groups=None) -> CompositionMatrix:
    rng = np.random.default_rng(seed)
    values = rng.dirichlet(np.full(d, concentration), size=n)
    return CompositionMatrix(values, groups=groups)


def random_counts(seed, n=12, d=6, lam=40.0, zero_fraction=0.0) -> RawCountMatrix:
    rng = np.random.default_rng(seed)
    values = rng.poisson(lam, size=(n, d)).astype(float) + 1.0
    if zero_fraction > 0:
        mask = rng.random((n, d)) < zero_fraction
        values[mask] = 0.0
        values[values.sum(axis=1) == 0, 0] = 1.0
    return RawCountMatrix(values)


@pytest.fixture
def comp20x8() -> CompositionMatrix:
    return random_composition(101)


@pytest.fixture
def comp30x6() -> CompositionMatrix:
    return random_composition(202, n=30, d=6)
