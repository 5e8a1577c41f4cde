"""Deterministic sub-seed derivation.

Scheme ``splitmix64-v1``: the master seed is passed through SplitMix64, then
each key is XOR-ed in and mixed again. Changing this changes every curve, so
bump ``SEED_SCHEME`` alongside any edit.
"""

SEED_SCHEME = "splitmix64-v1"

_MASK = (1 << 64) - 1


def splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & _MASK
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK
    return x ^ (x >> 31)


def derive_seed(master: int, *keys: int) -> int:
    h = splitmix64(master & _MASK)
    for k in keys:
        h = splitmix64(h ^ (k & _MASK))
    return h
