import functools

import numpy as np
import pytest

from htevec.ensembles import EnsembleSpec
from htevec.montecarlo import process_samples


@functools.lru_cache(maxsize=None)
def cached_samples(kind: str, params: tuple, n: int, R: int, points: tuple, process: str, seed: int):
    """Process samples shared between tests that need the same simulation."""
    spec = EnsembleSpec(kind=kind, seed=seed, **dict(params))
    return process_samples(spec, n, R, list(points), process, workers=1)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def report(capsys):
    """Print one PASS/FAIL line that survives output capture."""

    def _report(label: str, ok: bool, detail: str = ""):
        with capsys.disabled():
            print(f"\n{label}: {'PASS' if ok else 'FAIL'} {detail}".rstrip())
        return ok

    return _report
