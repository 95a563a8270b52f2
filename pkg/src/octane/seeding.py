import numpy as np


def derive_seed(seed: int, *keys: int) -> int:
    """Derive a child seed from a root seed and integer keys.

    The same (seed, keys) always yields the same child, independent of call order,
    so chunked or parallel work reproduces serial results exactly.
    """
    state = np.random.SeedSequence([int(seed), *[int(key) for key in keys]]).generate_state(1, dtype=np.uint32)
    return int(state[0])


def derive_rng(seed: int, *keys: int) -> np.random.Generator:
    return np.random.default_rng([int(seed), *[int(key) for key in keys]])
