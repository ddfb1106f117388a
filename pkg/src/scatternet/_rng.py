"""Seed derivation and counter-based hashing.

Two generators are used:

* point coordinates come from numpy's ``PCG64`` seeded through a
  ``SeedSequence([seed, stream_tag])``;
* per-vertex preference keys come from the splitmix64 finalizer applied to a
  counter ``(stream, vertex, neighbor)``. Being a pure function of the counter,
  any subset of vertices can be regenerated without touching the others, and
  the whole table can be computed vectorised.

Trial seeds derive from ``SeedSequence([master_seed, trial_index])``.
"""

import numpy as np

GENERATOR_VERSION = "scatternet-rng/1 (points=numpy.PCG64+SeedSequence, prefs=splitmix64-counter)"

STREAM_POINTS = 0x504F494E
STREAM_PREFS = 0x50524546
STREAM_STAGED = 0x53544147
STREAM_MOONS = 0x4D4F4F4E
STREAM_SAMPLING = 0x53414D50

_MASK = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_M1 = 0xBF58476D1CE4E5B9
_M2 = 0x94D049BB133111EB


def mix64_int(x):
    """splitmix64 finalizer on a Python int."""
    x &= _MASK
    x = ((x ^ (x >> 30)) * _M1) & _MASK
    x = ((x ^ (x >> 27)) * _M2) & _MASK
    return x ^ (x >> 31)


def mix64(x):
    """splitmix64 finalizer on a uint64 array (wrapping arithmetic)."""
    x = np.asarray(x, dtype=np.uint64)
    x = (x ^ (x >> np.uint64(30))) * np.uint64(_M1)
    x = (x ^ (x >> np.uint64(27))) * np.uint64(_M2)
    return x ^ (x >> np.uint64(31))


def stream_base(seed, tag):
    return mix64_int(mix64_int(seed) ^ mix64_int(tag))


def vertex_streams(base, vertices):
    """Per-vertex stream keys ``mix64(base + (i + 1) * golden)``."""
    v = np.asarray(vertices, dtype=np.uint64)
    return mix64(np.uint64(base) + (v + np.uint64(1)) * np.uint64(_GOLDEN))


def counter_keys(streams, counters):
    """Uniform 64-bit keys for ``(stream, counter)`` pairs."""
    c = np.asarray(counters, dtype=np.uint64)
    return mix64(streams ^ mix64(c * np.uint64(_GOLDEN) + np.uint64(_M2)))


def keys_to_unit(keys):
    """Map uint64 keys to floats in [0, 1) using the top 53 bits."""
    return (keys >> np.uint64(11)).astype(np.float64) * (1.0 / 9007199254740992.0)


def point_generator(seed):
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([int(seed), STREAM_POINTS])))


def generator(seed, tag):
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([int(seed), int(tag)])))


def trial_seeds(master_seed, trial_index):
    """``(point_seed, pref_seed)`` for one trial of an experiment."""
    ss = np.random.SeedSequence([int(master_seed), int(trial_index)])
    a, b = ss.generate_state(2, dtype=np.uint64)
    return int(a), int(b)
