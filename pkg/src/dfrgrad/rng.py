"""SplitMix64 stream used for masks, synthetic noise and shuffling.

The generator is counter based: output ``i`` of a stream seeded with ``s``
is ``mix(s + (i + 1) * GAMMA)``, so blocks of outputs can be produced with
vectorised uint64 arithmetic and any implementation that follows the
reference algorithm reproduces the same integers.
"""

import numpy as np

GAMMA = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_MASK64 = (1 << 64) - 1


def _mix(z):
    z = (z ^ (z >> np.uint64(30))) * _M1
    z = (z ^ (z >> np.uint64(27))) * _M2
    return z ^ (z >> np.uint64(31))


def splitmix64(seed, count, start=0):
    """Return outputs ``start .. start + count - 1`` of the stream for `seed`."""
    seed = np.uint64(int(seed) & _MASK64)
    idx = np.arange(start + 1, start + count + 1, dtype=np.uint64)
    with np.errstate(over="ignore"):
        return _mix(seed + idx * GAMMA)


def uniform(seed, count, start=0):
    """Doubles in [0, 1) built from the top 53 bits of each output."""
    bits = splitmix64(seed, count, start) >> np.uint64(11)
    return bits.astype(np.float64) * (1.0 / (1 << 53))


def normal(seed, count, start=0):
    """Standard normal draws via Box-Muller on consecutive output pairs."""
    pairs = (count + 1) // 2
    u = uniform(seed, 2 * pairs, 2 * start)
    u1 = 1.0 - u[0::2]  # (0, 1], keeps log finite
    u2 = u[1::2]
    radius = np.sqrt(-2.0 * np.log(u1))
    z = np.empty(2 * pairs)
    z[0::2] = radius * np.cos(2.0 * np.pi * u2)
    z[1::2] = radius * np.sin(2.0 * np.pi * u2)
    return z[:count]


def permutation(seed, n):
    """Deterministic Fisher-Yates permutation of ``range(n)``."""
    perm = list(range(n))
    if n < 2:
        return perm
    draws = splitmix64(seed, n - 1)
    for step, i in enumerate(range(n - 1, 0, -1)):
        j = int(draws[step] % np.uint64(i + 1))
        perm[i], perm[j] = perm[j], perm[i]
    return perm


def derive_seed(seed, *tags):
    """Child seed for an independent sub-stream (e.g. one per epoch)."""
    out = int(seed) & _MASK64
    for tag in tags:
        out = int(splitmix64(out ^ (int(tag) & _MASK64), 1)[0])
    return out
