"""Deterministic derivation of independent random streams.

Every stochastic component takes an explicit integer seed, and nested
components derive their own seeds from the parent seed plus a key path.
Derivation is a keyed blake2b hash, so child streams are independent of
call order, platform, and worker count.
"""

from __future__ import annotations

import hashlib

import numpy as np

_U64 = 2**64


def derive_seed(master: int, *keys: int | str | bytes) -> int:
    """Derive a child seed from ``master`` and a path of keys.

    The same ``(master, *keys)`` always yields the same 64-bit seed.
    Keys may be ints, strings, or raw bytes.
    """
    h = hashlib.blake2b(digest_size=8)
    h.update(int(master % _U64).to_bytes(8, "little"))
    for key in keys:
        if isinstance(key, bytes):
            blob = key
        elif isinstance(key, str):
            blob = key.encode("utf-8")
        elif isinstance(key, (int, np.integer)):
            blob = int(key % _U64).to_bytes(8, "little")
        else:
            raise TypeError(f"unsupported seed key type: {type(key)!r}")
        h.update(len(blob).to_bytes(4, "little"))
        h.update(blob)
    return int.from_bytes(h.digest(), "little")


def rng_for(master: int, *keys: int | str | bytes) -> np.random.Generator:
    """A fresh ``numpy`` generator for the stream named by the key path."""
    return np.random.default_rng(derive_seed(master, *keys))


def bag_fingerprint(bag: np.ndarray) -> bytes:
    """Stable byte fingerprint of an instance bag (content-addressed seeds)."""
    arr = np.ascontiguousarray(bag, dtype=np.int64)
    if arr.dtype.byteorder == ">":  # pragma: no cover - big-endian hosts only
        arr = arr.byteswap()
    return arr.tobytes()
