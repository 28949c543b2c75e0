"""Shared test helpers."""

import numpy as np

from pga_lab.verify import random_params  # noqa: F401  (re-exported for tests)


def philox(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(seed))
