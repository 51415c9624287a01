"""Deterministic pseudo-randomness for seeded trials.

A splitmix64 generator (64-bit state, golden-ratio increment) so that seeded
command-line runs reproduce bit for bit.  Only uniform draws are derived from
the raw stream; everything else is built from those.
"""
from __future__ import annotations

import math

import numpy as np

from .frames import EulerAngles, Frame, compose_improper, compose_proper

_MASK = (1 << 64) - 1


class SplitMix64:
    """splitmix64: state += 0x9E3779B97F4A7C15, output fmix64 of the state."""

    def __init__(self, seed: int):
        self._state = int(seed) & _MASK

    def next_u64(self) -> int:
        self._state = (self._state + 0x9E3779B97F4A7C15) & _MASK
        z = self._state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
        return z ^ (z >> 31)

    def random(self) -> float:
        """Uniform double in [0, 1) with 53 bits of precision."""
        return (self.next_u64() >> 11) * 2.0**-53

    def uniform(self, lo: float, hi: float) -> float:
        return lo + (hi - lo) * self.random()

    def unit_vector(self) -> np.ndarray:
        """Uniform direction on the sphere."""
        z = 1.0 - 2.0 * self.random()
        phi = self.uniform(-math.pi, math.pi)
        r = math.sqrt(max(0.0, 1.0 - z * z))
        return np.array([r * math.cos(phi), r * math.sin(phi), z])

    def euler_angles(self) -> EulerAngles:
        """Haar-uniform zxz angles: uniform alpha, gamma and uniform cos(beta)."""
        return EulerAngles(
            self.uniform(-math.pi, math.pi),
            math.acos(1.0 - 2.0 * self.random()),
            self.uniform(-math.pi, math.pi),
        )

    def frame(self, proper: bool = True) -> Frame:
        e = self.euler_angles()
        mat = compose_proper(e) if proper else compose_improper(e)
        return Frame.from_rows(mat)
