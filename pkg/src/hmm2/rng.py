"""Deterministic random number generation.

Every random draw in this package comes from the SplitMix64 generator
implemented here, so that identical seeds give identical output on every
platform and Python version.  The algorithm is fully specified below; no
hidden entropy source is ever consulted.

SplitMix64
    The state is a 64-bit counter advanced by the odd constant
    0x9E3779B97F4A7C15 (the golden ratio scaled to 2^64).  Each output is the
    new counter value passed through an avalanche permutation::

        z ^= z >> 30;  z *= 0xBF58476D1CE4E5B9
        z ^= z >> 27;  z *= 0x94D049BB133111EB
        z ^= z >> 31

    with all arithmetic modulo 2^64.

Derived streams
    Replica ``r`` of an experiment with base seed ``s`` uses the seed
    ``derive_seed(s, r) = mix64((s + (r + 1) * 0x9E3779B97F4A7C15) mod 2^64)``
    where ``mix64`` is the avalanche permutation above.  Distinct replica
    indices therefore yield decorrelated, reproducible streams.

Distributions
    * ``random()`` takes the top 53 bits of one output word: ``u >> 11``
      times 2^-53, uniform on [0, 1).
    * ``normal()`` uses the Marsaglia polar method: draw ``(v1, v2)`` uniform
      on (-1, 1)^2 until ``0 < s = v1^2 + v2^2 < 1``, then return
      ``v1 * sqrt(-2 ln(s) / s)`` and cache the ``v2`` variate for the next
      call.
    * ``index_from_cdf()`` inverts a cumulative distribution by linear scan,
      returning the first index whose cumulative weight exceeds the uniform
      draw.
"""

from __future__ import annotations

import math

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


def mix64(z: int) -> int:
    """SplitMix64 avalanche permutation of a 64-bit word."""
    z &= _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def derive_seed(base_seed: int, index: int) -> int:
    """Seed for derived stream ``index`` (replica seeds, documented above)."""
    if index < 0:
        raise ValueError("stream index must be nonnegative")
    return mix64((base_seed + (index + 1) * _GOLDEN) & _MASK64)


class SplitMix64:
    """Counter-based 64-bit generator with a documented, portable stream."""

    __slots__ = ("_state", "_spare")

    def __init__(self, seed: int):
        self._state = seed & _MASK64
        self._spare: float | None = None

    def next_uint64(self) -> int:
        self._state = (self._state + _GOLDEN) & _MASK64
        return mix64(self._state)

    def random(self) -> float:
        """Uniform float in [0, 1) with 53 random bits."""
        return (self.next_uint64() >> 11) * 1.1102230246251565e-16  # 2**-53

    def normal(self) -> float:
        """Standard normal variate (Marsaglia polar method)."""
        if self._spare is not None:
            z = self._spare
            self._spare = None
            return z
        while True:
            v1 = 2.0 * self.random() - 1.0
            v2 = 2.0 * self.random() - 1.0
            s = v1 * v1 + v2 * v2
            if 0.0 < s < 1.0:
                factor = math.sqrt(-2.0 * math.log(s) / s)
                self._spare = v2 * factor
                return v1 * factor

    def gauss(self, mean: float, std: float) -> float:
        return mean + std * self.normal()

    def index_from_cdf(self, cdf: tuple[float, ...]) -> int:
        """First index i with u < cdf[i]; cdf must end at 1 (within rounding)."""
        u = self.random()
        for i, c in enumerate(cdf):
            if u < c:
                return i
        return len(cdf) - 1
