"""Phase-rotation error models and reproducible error draws.

Draws come from a Philox counter-based generator. The key is derived from
``(master_seed, realization_index, category[, j, direction])`` and the counter
block is the occurrence index, so every draw is addressable on its own and
does not depend on the order in which draws are requested.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np


class ErrorModel(str, enum.Enum):
    RELATIVE = "relative"
    ABSOLUTE = "absolute"


class Category(str, enum.Enum):
    TYPED_SYMMETRIC = "typed-sym"
    TYPED_ASYMMETRIC = "typed-asym"
    NON_TYPED = "non-typed"


_CATEGORY_CODE = {Category.TYPED_SYMMETRIC: 1, Category.TYPED_ASYMMETRIC: 2, Category.NON_TYPED: 3}
_U64_TO_UNIT = 2.0**-53


@dataclass(frozen=True)
class NoiseSpec:
    model: ErrorModel = ErrorModel.RELATIVE
    category: Category = Category.TYPED_SYMMETRIC
    sigma: float = 0.0
    master_seed: int = 0
    realization_index: int = 0

    def __post_init__(self):
        object.__setattr__(self, "model", ErrorModel(self.model))
        object.__setattr__(self, "category", Category(self.category))
        if not (self.sigma >= 0.0 and math.isfinite(self.sigma)):
            raise ValueError(f"sigma must be finite and >= 0, got {self.sigma}")
        if not 0 <= self.master_seed < 2**64:
            raise ValueError("master_seed must fit in 64 unsigned bits")
        if self.realization_index < 0:
            raise ValueError("realization_index must be >= 0")

    def with_realization(self, index: int) -> NoiseSpec:
        return NoiseSpec(self.model, self.category, self.sigma, self.master_seed, index)

    def to_dict(self) -> dict:
        return {
            "model": self.model.value,
            "category": self.category.value,
            "sigma": self.sigma,
            "master_seed": self.master_seed,
            "realization_index": self.realization_index,
        }

    @classmethod
    def from_dict(cls, d: dict) -> NoiseSpec:
        return cls(
            model=d.get("model", ErrorModel.RELATIVE),
            category=d.get("category", Category.TYPED_SYMMETRIC),
            sigma=float(d.get("sigma", 0.0)),
            master_seed=int(d.get("master_seed", 0)),
            realization_index=int(d.get("realization_index", 0)),
        )


NOISELESS = NoiseSpec()


def _key(*words: int) -> np.ndarray:
    # Philox takes a 128-bit key; SeedSequence hashes the tuple into it
    return np.random.SeedSequence([int(w) for w in words]).generate_state(2, np.uint64)


def standard_normals(key: np.ndarray, start: int, count: int) -> np.ndarray:
    """Normals for occurrences ``start .. start+count-1`` of the stream ``key``.

    Occurrence ``k`` consumes the first two 64-bit words of Philox counter
    block ``k`` and maps them through the Box-Muller transform.
    """
    bitgen = np.random.Philox(key=key)
    if start:
        bitgen.advance(start)
    raw = bitgen.random_raw(4 * count).reshape(count, 4)
    u1 = ((raw[:, 0] >> np.uint64(11)).astype(np.float64) + 0.5) * _U64_TO_UNIT
    u2 = ((raw[:, 1] >> np.uint64(11)).astype(np.float64) + 0.5) * _U64_TO_UNIT
    return np.sqrt(-2.0 * np.log(u1)) * np.cos(2.0 * np.pi * u2)


@dataclass
class NoiseLedger:
    """Serves alpha draws for ``(j, direction)`` according to the error category."""

    spec: NoiseSpec
    typed_draws: dict = field(default_factory=dict)
    nontyped_counter: int = 0
    _stream: np.ndarray = field(default_factory=lambda: np.empty(0), repr=False)

    def _typed(self, j: int, direction: int) -> float:
        if self.spec.category == Category.TYPED_SYMMETRIC:
            direction = 1
        key = (j, direction)
        value = self.typed_draws.get(key)
        if value is None:
            s = self.spec
            k = _key(s.master_seed, s.realization_index, _CATEGORY_CODE[s.category], j,
                     0 if direction > 0 else 1)
            value = float(s.sigma * standard_normals(k, 0, 1)[0])
            self.typed_draws[key] = value
        return value

    def stream(self, start: int, count: int) -> np.ndarray:
        """Non-typed draws for occurrence indices ``start .. start+count-1``."""
        end = start + count
        if end > self._stream.size:
            size = max(end, 2 * self._stream.size, 256)
            s = self.spec
            k = _key(s.master_seed, s.realization_index, _CATEGORY_CODE[s.category])
            self._stream = s.sigma * standard_normals(k, 0, size)
        return self._stream[start:end]

    def alpha_for(self, j: int, direction: int) -> float:
        if j < 0:
            raise ValueError("rotation type j must be >= 0")
        if self.spec.sigma == 0.0:
            return 0.0
        if self.spec.category == Category.NON_TYPED:
            value = float(self.stream(self.nontyped_counter, 1)[0])
            self.nontyped_counter += 1
            return value
        return self._typed(j, direction)

    def alphas(self, js: np.ndarray, directions: np.ndarray) -> np.ndarray:
        """Draws for a sequence of gate occurrences in emission order.

        Non-typed draws continue from the ledger's occurrence counter.
        """
        n = len(js)
        if self.spec.sigma == 0.0 or n == 0:
            return np.zeros(n)
        if self.spec.category == Category.NON_TYPED:
            out = self.stream(self.nontyped_counter, n).copy()
            self.nontyped_counter += n
            return out
        table = {}
        out = np.empty(n)
        for i, (j, d) in enumerate(zip(js.tolist(), directions.tolist())):
            key = (j, d)
            if key not in table:
                table[key] = self._typed(j, d)
            out[i] = table[key]
        return out


def make_ledger(spec: NoiseSpec) -> NoiseLedger:
    return NoiseLedger(spec)


def alpha_for(ledger: NoiseLedger, j: int, direction: int) -> float:
    return ledger.alpha_for(j, direction)


def realized_angle(model, j: int, direction: int, alpha: float) -> float:
    """Noisy rotation angle: relative ``±(pi/2^j)(1+alpha)``, absolute ``±(pi/2^j + alpha)``."""
    if j < 0:
        raise ValueError("rotation type j must be >= 0")
    ideal = math.pi / 2**j
    if ErrorModel(model) == ErrorModel.RELATIVE:
        return direction * ideal * (1.0 + alpha)
    return direction * (ideal + alpha)


def realized_angles(model, js: np.ndarray, directions: np.ndarray, alphas: np.ndarray) -> np.ndarray:
    ideal = np.pi / np.exp2(js)
    if ErrorModel(model) == ErrorModel.RELATIVE:
        return directions * ideal * (1.0 + alphas)
    return directions * (ideal + alphas)
