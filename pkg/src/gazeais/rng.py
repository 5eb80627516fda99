"""Deterministic seed derivation and order-stable parallel mapping.

All randomness in the package flows from integer master seeds. Sub-streams
are derived from (seed, key...) tuples so that per-surrogate or per-trial
work is a pure function of its own keys: evaluating it sequentially, in a
thread pool, or in any order gives bit-identical results.
"""

import hashlib
from concurrent.futures import ThreadPoolExecutor

import numpy as np

_MASK64 = (1 << 64) - 1


def _as_entropy(key):
    if isinstance(key, (bool, float)):
        raise TypeError(f"seed keys must be int or str, got {type(key).__name__}")
    if isinstance(key, (int, np.integer)):
        return int(key) & _MASK64
    if isinstance(key, str):
        digest = hashlib.sha256(key.encode("utf-8")).digest()
        return int.from_bytes(digest[:8], "big")
    raise TypeError(f"seed keys must be int or str, got {type(key).__name__}")


def derive_rng(*keys) -> np.random.Generator:
    """Generator seeded deterministically from a tuple of int/str keys."""
    return np.random.default_rng(
        np.random.SeedSequence([_as_entropy(k) for k in keys])
    )


def derive_seed(*keys) -> int:
    """Collapse int/str keys into a single reproducible integer seed."""
    ss = np.random.SeedSequence([_as_entropy(k) for k in keys])
    return int(ss.generate_state(1, np.uint64)[0])


def indexed_map(fn, n, n_jobs=1):
    """Evaluate [fn(0), ..., fn(n-1)], optionally in a thread pool.

    Results are returned in index order; fn must depend only on its index
    (plus closed-over read-only state), which makes the output independent
    of n_jobs.
    """
    if n_jobs is None or n_jobs <= 1 or n < 2:
        return [fn(i) for i in range(n)]
    with ThreadPoolExecutor(max_workers=n_jobs) as pool:
        return list(pool.map(fn, range(n)))
