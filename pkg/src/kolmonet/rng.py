"""Counter-based random streams and deterministic chunked parallel maps.

Every stochastic quantity in the package is drawn from a Philox stream keyed by
``(seed, *keys)``.  Monte Carlo loops are cut into fixed-size chunks, each chunk
owns its own stream, and chunk results are reduced in index order, so outputs do
not depend on how many worker threads ran them.
"""

from __future__ import annotations

import hashlib
import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np

CHUNK = 4096
_MASK64 = (1 << 64) - 1


def _key_int(key) -> int:
    if isinstance(key, (int, np.integer)):
        return int(key) & _MASK64
    digest = hashlib.sha256(str(key).encode()).digest()
    return int.from_bytes(digest[:8], "little")


def _seed_sequence(seed, keys):
    return np.random.SeedSequence([_key_int(seed), *(_key_int(k) for k in keys)])


def derive_seed(seed, *keys) -> int:
    """Deterministic 64-bit child seed of ``seed`` for the given key path."""
    state = _seed_sequence(seed, keys).generate_state(2, dtype=np.uint32)
    return int(state[0]) | (int(state[1]) << 32)


def stream(seed, *keys) -> np.random.Generator:
    """Independent Philox generator for the key path ``(seed, *keys)``."""
    return np.random.Generator(np.random.Philox(_seed_sequence(seed, keys)))


def thread_count() -> int:
    raw = os.environ.get("KOLMO_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def chunk_sizes(n: int, chunk: int = CHUNK) -> list[int]:
    full, rest = divmod(int(n), chunk)
    return [chunk] * full + ([rest] if rest else [])


def map_chunks(fn, n: int, seed, *keys, chunk: int = CHUNK) -> list:
    """Call ``fn(rng, size, index)`` on every chunk of ``n`` draws.

    Results come back in chunk order whatever ``KOLMO_THREADS`` is set to.
    """
    sizes = chunk_sizes(n, chunk)

    def run(i):
        return fn(stream(seed, *keys, "chunk", i), sizes[i], i)

    workers = min(thread_count(), len(sizes))
    if workers <= 1:
        return [run(i) for i in range(len(sizes))]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(run, range(len(sizes))))
