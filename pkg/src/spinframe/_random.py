import numpy as np


def as_generator(seed=None):
    """Accept an int, SeedSequence, Generator or None and return a Generator."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def substreams(seed, count):
    """Independent deterministic generators, one per trial/restart index.

    Stream i depends only on (seed, i), so results do not depend on how
    the work is scheduled.
    """
    if isinstance(seed, np.random.Generator):
        seed = int(seed.integers(2**63))
    seq = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    return [np.random.default_rng(child) for child in seq.spawn(count)]


def named_seed(seed, name):
    """Derive a SeedSequence for a named substream (e.g. 'controls', 'labs')."""
    words = [ord(c) for c in name]
    base = 0 if seed is None else int(seed)
    return np.random.SeedSequence([base, *words])
