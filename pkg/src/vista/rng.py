"""Counter-based deterministic RNG for synthetic fixtures.

Every draw is SplitMix64's finalizer applied to
seed XOR (stream * 0x9E3779B97F4A7C15) XOR counter, so any language can
reproduce the exact same scenarios bit for bit. Uniforms come from the
top 53 bits; Gaussians via Box-Muller on consecutive uniforms.
"""

from __future__ import annotations

import math

_MASK = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


def mix64(x: int) -> int:
    """SplitMix64 output function over a 64-bit input."""
    x = (x + _GOLDEN) & _MASK
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK
    return (x ^ (x >> 31)) & _MASK


class CounterRng:
    """Stateless-core generator: (seed, stream, counter) -> u64 stream."""

    def __init__(self, seed: int, stream: int = 0):
        self.seed = seed & _MASK
        self.stream = stream & _MASK
        self.counter = 0

    def next_u64(self) -> int:
        value = mix64(self.seed ^ ((self.stream * _GOLDEN) & _MASK) ^ self.counter)
        self.counter += 1
        return value

    def uniform(self, lo: float = 0.0, hi: float = 1.0) -> float:
        u = (self.next_u64() >> 11) * (1.0 / (1 << 53))
        return lo + (hi - lo) * u

    def gaussian(self, mu: float = 0.0, sigma: float = 1.0) -> float:
        u1 = self.uniform()
        u2 = self.uniform()
        # 1 - u1 keeps the log argument strictly positive.
        z = math.sqrt(-2.0 * math.log(1.0 - u1)) * math.cos(2.0 * math.pi * u2)
        return mu + sigma * z

    def randint(self, n: int) -> int:
        """Uniform integer in [0, n). Modulo bias is negligible for the
        vocabulary-sized n used here."""
        if n < 1:
            raise ValueError(f"randint needs n >= 1, got {n}")
        return self.next_u64() % n
