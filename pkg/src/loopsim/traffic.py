"""Per-region demand signals: step levels + sinusoid + seeded gaussian noise.

Every region gets its own random substream derived from the master seed, so
adding a region never shifts another region's noise sequence.
"""

from __future__ import annotations

import hashlib
import math
import random
from dataclasses import dataclass, field


def derive_seed(master_seed: int, label: str) -> int:
    digest = hashlib.sha256(f"{master_seed}:{label}".encode()).digest()
    return int.from_bytes(digest[:8], "big")


@dataclass(frozen=True)
class RegionProfile:
    base: float = 0.0
    amplitude: float = 0.0
    period: int = 24
    phase: int = 0
    sigma: float = 0.0
    steps: tuple[tuple[int, float], ...] = ()   # (tick, new base), sorted

    def base_at(self, tick: int) -> float:
        level = self.base
        for at, value in self.steps:
            if tick >= at:
                level = value
        return level


@dataclass
class TrafficModel:
    profiles: dict[str, RegionProfile]
    master_seed: int
    _rngs: dict[str, random.Random] = field(default_factory=dict)
    _values: dict[tuple[str, int], float] = field(default_factory=dict)

    def _rng(self, region: str) -> random.Random:
        if region not in self._rngs:
            self._rngs[region] = random.Random(derive_seed(self.master_seed, f"traffic:{region}"))
        return self._rngs[region]

    def truth(self, region: str, tick: int) -> float:
        """Noiseless demand level for a region at a tick."""
        profile = self.profiles[region]
        wave = 0.0
        if profile.amplitude:
            wave = profile.amplitude * math.sin(
                2.0 * math.pi * (tick + profile.phase) / profile.period
            )
        return profile.base_at(tick) + wave

    def sample(self, region: str, tick: int) -> float:
        """Observed demand; must be drawn in tick order per region (cached)."""
        key = (region, tick)
        if key not in self._values:
            profile = self.profiles[region]
            noise = self._rng(region).gauss(0.0, profile.sigma) if profile.sigma else 0.0
            value = max(0.0, self.truth(region, tick) + noise)
            self._values[key] = value
        return self._values[key]
