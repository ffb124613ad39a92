"""Seeded, splittable random streams.

Every stochastic object is drawn from a Philox stream keyed by
``(master_seed, index)`` so results do not depend on evaluation order.
"""
import numpy as np


def stream(seed: int, index: int = 0, *, domain: int = 0) -> np.random.Generator:
    """Independent generator for realization ``index`` under ``seed``.

    ``domain`` separates unrelated uses of the same seed (sampling the chain,
    drawing test states, baselines, ...).
    """
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=(int(domain), int(index)))
    return np.random.Generator(np.random.Philox(ss))


# stream domains
CHAIN = 0
STATES = 1
QDRIFT = 2
TROTTER = 3
